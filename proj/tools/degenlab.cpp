#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "degenlab/app.hpp"
#include "degenlab/error.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Degenerate fractional Calderon experiments"};
    std::string config;
    degenlab::app::RunOptions opts;
    int threads = 0;
    std::uint64_t seed = 0;
    cli.add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cli.add_option("--out", opts.outDir, "Output directory")->capture_default_str();
    auto* th = cli.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cli.add_flag("--no-cache", opts.noCache, "Do not read or write the DtN cache");
    auto* sd = cli.add_option("--seed", seed, "Override the config seed");
    CLI11_PARSE(cli, argc, argv);
    if (*th) opts.threads = threads;
    if (*sd) opts.seed = seed;
    if (const char* c = std::getenv("DEGENLAB_CACHE"); c && *c) opts.cacheDir = c;

    try {
        const auto man = degenlab::app::run_file(config, opts);
        for (const auto& c : man.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' '
                      << c.threshold << '\n';
        std::cout << man.name << ": " << (man.passed() ? "ok" : "checks failed") << " (" << man.seconds << " s, "
                  << opts.outDir << "/manifest.json)\n";
        return man.passed() ? 0 : 1;
    } catch (const degenlab::Error& e) {
        std::cerr << "degenlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "degenlab: " << e.what() << '\n';
        return 3;
    }
}
