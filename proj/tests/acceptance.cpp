// Runs configs/acceptance/c<N>-*.json through the experiment runner and
// prints one line per acceptance criterion.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "degenlab/app.hpp"
#include "degenlab/error.hpp"

namespace fs = std::filesystem;
using namespace degenlab;

namespace {

struct Criterion {
    int id;
    const char* title;
};

const Criterion kCriteria[] = {
    {1, "manufactured-solution convergence"},
    {2, "DtN symmetry"},
    {3, "Alessandrini identity"},
    {4, "CGO remainder decay"},
    {5, "Carleman boundedness"},
    {6, "trace inequalities"},
    {7, "Runge simultaneity"},
    {8, "reconstruction round trip"},
    {9, "eigenvalue guard"},
};

fs::path config_for(const fs::path& dir, int id) {
    const std::string prefix = "c" + std::to_string(id) + "-";
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind(prefix, 0) == 0 && e.path().extension() == ".json") return e.path();
    throw Error(ErrorKind::IoError, "no config " + prefix + "*.json in " + dir.string());
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.insert(std::stoi(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Acceptance suite"};
    std::string configDir = DEGENLAB_ACCEPTANCE_DIR, outDir = "acceptance-out", only, expectFail;
    int threads = 1;
    cli.add_option("--configs", configDir, "Directory with c<N>-*.json")->capture_default_str();
    cli.add_option("--out", outDir, "Output root")->capture_default_str();
    cli.add_option("--threads", threads, "Worker threads")->capture_default_str();
    cli.add_option("--only", only, "Comma-separated criterion ids");
    cli.add_option("--expect-fail", expectFail,
                   "Comma-separated ids known to fail; the exit status is 0 iff exactly these fail");
    CLI11_PARSE(cli, argc, argv);
    const std::set<int> selected = parse_list(only), expected = parse_list(expectFail);

    fs::create_directories(outDir);
    std::ofstream report(fs::path(outDir) / "report.txt");
    auto emit = [&](const std::string& text) {
        std::cout << text << std::endl;
        report << text << '\n';
    };

    std::set<int> failed;
    for (const auto& c : kCriteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        std::ostringstream line;
        bool ok = false;
        try {
            app::RunOptions o;
            o.outDir = (fs::path(outDir) / ("c" + std::to_string(c.id))).string();
            o.noCache = true;
            o.threads = threads;
            const auto man = app::run_file(config_for(configDir, c.id).string(), o);
            ok = man.passed() && !man.checks.empty();
            std::string sep;
            for (const auto& k : man.checks) {
                if (k.name == "maxSeconds") continue;
                line << sep << (k.passed ? "" : "!") << k.name << '=' << k.value << ' ' << k.relation << ' '
                     << k.threshold;
                sep = "; ";
            }
            line << sep << "time " << man.seconds << " s";
            for (const auto& k : man.checks)
                if (k.name == "maxSeconds") line << (k.passed ? " <= " : " !> ") << k.threshold;
        } catch (const std::exception& e) {
            line << "error: " << e.what();
        }
        if (!ok) failed.insert(c.id);
        emit("criterion " + std::to_string(c.id) + ' ' + (ok ? "PASS" : "FAIL") + " [" + c.title + "] " + line.str());
    }
    std::set<int> expectedRun;
    for (int id : expected)
        if (selected.empty() || selected.count(id)) expectedRun.insert(id);
    if (!expectedRun.empty()) {
        std::string text = "known failures:";
        for (int id : expectedRun) text += ' ' + std::to_string(id);
        emit(text + (failed == expectedRun ? " (as recorded)" : " (MISMATCH)"));
    }
    return failed == expectedRun ? 0 : 1;
}
