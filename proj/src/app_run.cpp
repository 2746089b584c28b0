#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "degenlab/app.hpp"
#include "degenlab/carleman.hpp"
#include "degenlab/cgo.hpp"
#include "degenlab/dtn.hpp"
#include "degenlab/error.hpp"
#include "degenlab/forward.hpp"
#include "degenlab/io.hpp"
#include "degenlab/norms.hpp"
#include "degenlab/reconstruct.hpp"
#include "degenlab/runge.hpp"

namespace fs = std::filesystem;

namespace degenlab::app {

bool RunManifest::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

Json RunManifest::to_json() const {
    Json j;
    j["name"] = name;
    j["command"] = command;
    j["configDigest"] = configDigest;
    j["toolVersion"] = toolVersion;
    j["cacheKeys"] = cacheKeys;
    j["seconds"] = seconds;
    j["passed"] = passed();
    Json arts = Json::array();
    for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    j["artifacts"] = arts;
    Json cs = Json::array();
    for (const auto& c : checks) {
        Json e{{"name", c.name}, {"relation", c.relation}, {"threshold", c.threshold}, {"passed", c.passed}};
        // NaN and inf are not JSON numbers
        e["value"] = std::isfinite(c.value) ? Json(c.value) : Json(std::to_string(c.value));
        cs.push_back(e);
    }
    j["checks"] = cs;
    j["summary"] = summary;
    return j;
}

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& why) {
    throw Error(ErrorKind::ConfigInvalid, "field '" + where + "': " + why);
}

// Typed access to the "params" object of a case.
class Params {
public:
    explicit Params(const Json& cs) : p_(cs.value("params", Json::object())) {}

    bool has(const char* k) const { return p_.contains(k); }
    const Json& raw(const char* k) const { return p_.at(k); }

    double num(const char* k, std::optional<double> def = {}) const {
        if (!p_.contains(k)) {
            if (def) return *def;
            invalid(std::string("params.") + k, "missing");
        }
        if (!p_[k].is_number()) invalid(std::string("params.") + k, "expected a number");
        return p_[k].get<double>();
    }
    int integer(const char* k, std::optional<int> def = {}) const {
        if (!p_.contains(k)) {
            if (def) return *def;
            invalid(std::string("params.") + k, "missing");
        }
        if (!p_[k].is_number_integer()) invalid(std::string("params.") + k, "expected an integer");
        return p_[k].get<int>();
    }
    bool flag(const char* k, bool def) const {
        if (!p_.contains(k)) return def;
        if (!p_[k].is_boolean()) invalid(std::string("params.") + k, "expected a boolean");
        return p_[k].get<bool>();
    }
    std::string str(const char* k, const std::string& def) const {
        if (!p_.contains(k)) return def;
        if (!p_[k].is_string()) invalid(std::string("params.") + k, "expected a string");
        return p_[k].get<std::string>();
    }
    std::vector<double> nums(const char* k, std::optional<std::vector<double>> def = {}) const {
        if (!p_.contains(k)) {
            if (def) return *def;
            invalid(std::string("params.") + k, "missing");
        }
        if (!p_[k].is_array() || p_[k].empty()) invalid(std::string("params.") + k, "expected a non-empty array");
        std::vector<double> v;
        for (const auto& x : p_[k]) {
            if (!x.is_number()) invalid(std::string("params.") + k, "expected numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }
    std::vector<int> ints(const char* k, std::optional<std::vector<int>> def = {}) const {
        if (!p_.contains(k)) {
            if (def) return *def;
            invalid(std::string("params.") + k, "missing");
        }
        if (!p_[k].is_array() || p_[k].empty()) invalid(std::string("params.") + k, "expected a non-empty array");
        std::vector<int> v;
        for (const auto& x : p_[k]) {
            if (!x.is_number_integer()) invalid(std::string("params.") + k, "expected integers");
            v.push_back(x.get<int>());
        }
        return v;
    }
    std::vector<std::string> strs(const char* k, const std::vector<std::string>& def) const {
        if (!p_.contains(k)) return def;
        if (!p_[k].is_array()) invalid(std::string("params.") + k, "expected an array of strings");
        std::vector<std::string> v;
        for (const auto& x : p_[k]) {
            if (!x.is_string()) invalid(std::string("params.") + k, "expected strings");
            v.push_back(x.get<std::string>());
        }
        return v;
    }

private:
    Json p_;
};

struct Case {
    int index = 0;
    std::string name;
    Json spec;
    std::shared_ptr<const Mesh> mesh;
    WeightSpec weight;
    Potentials p1, p2;
    Point extents{0, 0, 0};
    int dim = 2;
    Params params;

    explicit Case(const Json& cs) : spec(cs), params(cs) {}
};

class Context {
public:
    Context(const ExperimentConfig& cfg, const RunOptions& opts, RunManifest& man)
        : cfg_(cfg), man_(man), out_(opts.outDir) {
        seed = opts.seed.value_or(cfg.seed);
        threads = opts.threads.value_or(cfg.threads);
        useCache = cfg.cache && !opts.noCache;
        cacheDir = opts.cacheDir.empty() ? default_cache_dir() : opts.cacheDir;
        multi = num_cases(cfg) > 1;
    }

    std::uint64_t seed = 1;
    int threads = 1;
    bool useCache = true;
    std::string cacheDir;
    bool multi = false;

    Case make_case(int i) const {
        Case c(resolve_case(cfg_, i));
        c.index = i;
        if (cfg_.raw.contains("cases") && cfg_.raw["cases"][i].contains("name"))
            c.name = cfg_.raw["cases"][i]["name"].get<std::string>();
        else
            c.name = multi ? "case" + std::to_string(i) : cfg_.name;
        Mesh m = build_mesh(c.spec["mesh"]);
        c.dim = m.dim();
        for (int a = 0; a < c.dim; ++a) c.extents[a] = m.extent(a);
        c.mesh = std::make_shared<const Mesh>(std::move(m));
        c.weight = parse_weight(c.spec.value("weight", Json::object()));
        c.p1 = parse_potentials(c.spec.value("potentials", Json::object()), c.extents, c.dim, seed);
        c.p2 = parse_potentials(c.spec.value("potentials2", Json::object()), c.extents, c.dim, seed);
        return c;
    }

    std::string key_for(const Case& c) const {
        return cache_key(c.spec["mesh"], c.spec.value("weight", Json::object()),
                         c.spec.value("potentials", Json::object()), seed);
    }

    // Path for an output file; recorded for the manifest.
    std::string file(const std::string& name) {
        files_.push_back(name);
        return (out_ / name).string();
    }
    const std::vector<std::string>& files() const { return files_; }

    // Adds the check when the case configures a threshold for it.
    void check(const Case& c, const std::string& name, double value, const std::string& rel) {
        const Json checks = c.spec.value("checks", Json::object());
        if (!checks.contains(name)) return;
        Check k;
        k.name = multi ? c.name + "/" + name : name;
        k.relation = rel;
        k.value = value;
        k.threshold = checks[name].get<double>();
        k.passed = rel == ">=" ? value >= k.threshold : rel == "<" ? value < k.threshold : value <= k.threshold;
        man_.checks.push_back(k);
    }

    Json& summary(const Case& c) {
        if (!multi) return man_.summary;
        return man_.summary["cases"][c.name];
    }

    std::string prefix(const Case& c) const { return multi ? c.name + "-" : ""; }

private:
    const ExperimentConfig& cfg_;
    RunManifest& man_;
    fs::path out_;
    std::vector<std::string> files_;
};

const std::map<std::string, std::set<std::string>>& known_checks() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"forward", {"residual", "maxDeviation", "minRate", "denseAgreement", "guardRaised", "referenceAgreement"}},
        {"dtn", {"symmetryDefect", "transposeDefect"}},
        {"alessandrini", {"finestResidual", "monotoneRatio", "maxResidual"}},
        {"runge", {"spanReproduction", "monotoneDefect", "combinedError", "interiorResidual", "liouville"}},
        {"cgo-decay", {"slopeL2", "slopeH1", "slopeSigma1"}},
        {"carleman", {"maxSlope"}},
        {"traces", {"maxVariation", "constantRatioError"}},
        {"reconstruct", {"errorV", "errorQ", "roundTrip", "hermitianDefect", "gapGrowth", "gapDecrease"}},
    };
    return k;
}

ComplexField complex_data(const Params& p, const char* key, const char* imagKey, const Case& c, std::uint64_t seed,
                          double def) {
    RealField re = p.has(key) ? parse_field(p.raw(key), c.extents, c.dim, seed) : constant_field(def);
    RealField im = p.has(imagKey) ? parse_field(p.raw(imagKey), c.extents, c.dim, seed) : RealField{};
    if (!re) re = constant_field(0.0);
    if (!im) return [re](const Point& x) { return cplx(re(x)); };
    return [re, im](const Point& x) { return cplx(re(x), im(x)); };
}

RealField difference(const RealField& a, const RealField& b) {
    if (!a && !b) return constant_field(0.0);
    if (!b) return a;
    if (!a) return [b](const Point& x) { return -b(x); };
    return [a, b](const Point& x) { return a(x) - b(x); };
}

double max_ratio(const std::vector<double>& v) {
    double r = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) r = std::max(r, v[i] / v[i - 1]);
    return r;
}

// ---------------------------------------------------------------- forward

void forward_solve(Context& ctx, const Case& c) {
    const Params& p = c.params;
    AssemblyOptions ao;
    ao.threads = ctx.threads;
    auto sa = make_assembly(c.mesh, c.weight, c.p1, p.num("lambda", 0.0), ao);
    SolverOptions so;
    so.eigenGuard = p.flag("eigenGuard", true);
    so.threads = ctx.threads;
    MixedData d;
    const ComplexField f2 = complex_data(p, "f2", "f2imag", c, ctx.seed, 0.0);
    d.f2.resize(static_cast<int>(sa->sigma2Dofs.size()));
    for (std::size_t i = 0; i < sa->sigma2Dofs.size(); ++i)
        d.f2(static_cast<int>(i)) = f2(c.mesh->vertex(sa->sigma2Dofs[i]));
    if (p.has("f1")) d.f1 = complex_data(p, "f1", "f1imag", c, ctx.seed, 0.0);
    if (p.has("F0")) d.F0 = complex_data(p, "F0", "F0imag", c, ctx.seed, 0.0);
    const Solution sol = solve_mixed(sa, d, so);
    write_field_csv(ctx.file(ctx.prefix(c) + "u.csv"), *c.mesh, sol.u);
    write_field(ctx.file(ctx.prefix(c) + "u.dlf"), *c.mesh, sol.u, "u");
    Json& s = ctx.summary(c);
    s["dofs"] = sa->num_dofs();
    s["residual"] = sol.residual;
    s["aprioriRatio"] = sol.aprioriRatio;
    ctx.check(c, "residual", sol.residual, "<=");
    if (p.has("reference")) {
        const double ref = p.num("reference");
        double dev = 0.0;
        for (int v = 0; v < sol.u.size(); ++v) dev = std::max(dev, std::abs(sol.u(v) - ref));
        s["maxDeviation"] = dev;
        ctx.check(c, "maxDeviation", dev, "<=");
    }
}

// u* = cos(pi x_1) (1 + x_d^{2s} / (2s)) has w d_d u* = cos(pi x_1), so
// -div(w grad u*) = pi^2 w u*.
void forward_manufactured(Context& ctx, const Case& c) {
    const Params& p = c.params;
    if (c.dim != 2) invalid("mesh.lengths", "manufactured study is two-dimensional");
    const std::vector<double> svals = p.nums("s", std::vector<double>{c.weight.s});
    const std::vector<int> cells = p.ints("cells");
    const double V = p.num("V", 1.0), q = p.num("q", 0.5);
    std::vector<std::vector<double>> rows;
    double minRate = std::numeric_limits<double>::infinity();
    Json& sum = ctx.summary(c);
    for (double s : svals) {
        const WeightSpec ws{s, WeightMode::Vertical};
        ws.validate();
        const double c2 = 1.0 / (2.0 * s);
        ExactField ex;
        ex.value = [=](const Point& x) { return cplx(std::cos(kPi * x[0]) * (1.0 + c2 * std::pow(x[1], 2.0 * s))); };
        ex.grad = [=](const Point& x) {
            return std::array<cplx, 3>{-kPi * std::sin(kPi * x[0]) * (1.0 + c2 * std::pow(x[1], 2.0 * s)),
                                       std::cos(kPi * x[0]) * std::pow(x[1], 2.0 * s - 1.0), 0.0};
        };
        Potentials pots;
        pots.V = constant_field(V);
        pots.q = constant_field(q);
        double prevErr = 0.0, prevH = 0.0;
        for (int n : cells) {
            auto mesh = std::make_shared<const Mesh>(
                build_graded_box({c.extents[0], c.extents[1]}, {n, n}, c.mesh->grading_ratio()));
            AssemblyOptions ao;
            ao.threads = ctx.threads;
            auto sa = make_assembly(mesh, ws, pots, 0.0, ao);
            MixedData d;
            d.F0 = [=](const Point& x) { return (kPi * kPi + V) * ex.value(x); };
            d.f1 = [=](const Point& x) { return -std::cos(kPi * x[0]) + q * ex.value(x); };
            d.f2.resize(static_cast<int>(sa->sigma2Dofs.size()));
            for (std::size_t i = 0; i < sa->sigma2Dofs.size(); ++i)
                d.f2(static_cast<int>(i)) = ex.value(mesh->vertex(sa->sigma2Dofs[i]));
            const Solution sol = solve_mixed(sa, d, SolverOptions{true, 1e-10, ctx.threads});
            const WeightedNorms e = error_norms(*mesh, ws, sol.u, ex);
            const double h = mesh->max_spacing(0);
            double rate = std::numeric_limits<double>::quiet_NaN();
            if (prevErr > 0.0) {
                rate = std::log(prevErr / e.h1w) / std::log(prevH / h);
                minRate = std::min(minRate, rate);
            }
            rows.push_back({s, static_cast<double>(n), h, e.h1w, e.l2w, rate});
            prevErr = e.h1w;
            prevH = h;
        }
    }
    write_csv(ctx.file(ctx.prefix(c) + "convergence.csv"), {"s", "n", "h", "h1w_error", "l2w_error", "rate"}, rows);
    sum["minRate"] = minRate;
    ctx.check(c, "minRate", minRate, ">=");
}

void forward_eigen(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const double lambda = p.num("lambda", 0.0);
    AssemblyOptions ao;
    ao.threads = ctx.threads;
    auto sa = make_assembly(c.mesh, c.weight, c.p1, lambda, ao);
    const double ev = nearest_eigenvalue(sa);
    Json& s = ctx.summary(c);
    s["nearestEigenvalue"] = ev;
    std::vector<double> row{lambda, ev};
    if (static_cast<int>(sa->freeDofs.size()) <= p.integer("denseMax", 1500)) {
        const ForwardSolver fs(sa, SolverOptions{false, 1e-10, ctx.threads});
        // K_FF carries -lambda M_FF; shift back to the unshifted pencil
        const MatrixXc K = MatrixXc(fs.K_FF()) + lambda * MatrixXc(fs.M_FF());
        const MatrixXc M = fs.M_FF();
        const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc> ges(K, M, Eigen::EigenvaluesOnly);
        double best = ges.eigenvalues()(0);
        for (int i = 0; i < ges.eigenvalues().size(); ++i)
            if (std::abs(ges.eigenvalues()(i) - lambda) < std::abs(best - lambda)) best = ges.eigenvalues()(i);
        const double rel = std::abs(ev - best) / std::max(std::abs(best), 1e-300);
        s["denseEigenvalue"] = best;
        s["denseAgreement"] = rel;
        row.push_back(best);
        row.push_back(rel);
        ctx.check(c, "denseAgreement", rel, "<=");
    } else {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        row.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    bool raised = false;
    try {
        const ForwardSolver guarded(make_assembly(c.mesh, c.weight, c.p1, ev, ao), SolverOptions{true, 1e-10, ctx.threads});
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroIsEigenvalue) throw;
        raised = true;
    }
    s["guardRaised"] = raised;
    row.push_back(raised ? 1.0 : 0.0);
    ctx.check(c, "guardRaised", raised ? 1.0 : 0.0, ">=");
    if (p.has("reference")) {
        const double ref = p.num("reference");
        const double rel = std::abs(ev - ref) / std::abs(ref);
        s["referenceAgreement"] = rel;
        ctx.check(c, "referenceAgreement", rel, "<=");
    }
    write_csv(ctx.file(ctx.prefix(c) + "eigen.csv"),
              {"lambda", "nearest", "dense", "dense_relative_difference", "guard_raised"}, {row});
}

void run_forward(Context& ctx, const Case& c) {
    const std::string study = c.spec.value("study", std::string("solve"));
    if (study == "solve") return forward_solve(ctx, c);
    if (study == "manufactured") return forward_manufactured(ctx, c);
    if (study == "eigen") return forward_eigen(ctx, c);
    invalid("study", "unknown forward study '" + study + "'");
}

// ---------------------------------------------------------------- dtn

void run_dtn(Context& ctx, const Case& c) {
    const Params& p = c.params;
    AssemblyOptions ao;
    ao.threads = ctx.threads;
    auto sa = make_assembly(c.mesh, c.weight, c.p1, p.num("lambda", 0.0), ao);
    const TraceBasis basis = make_basis(*sa, basis_kind_from_string(p.str("basis", "NodalHat")), p.integer("modes", 4));
    DtNOptions o;
    o.threads = ctx.threads;
    o.useCache = ctx.useCache;
    o.cacheDir = ctx.cacheDir;
    o.oracleMaxFree = p.integer("oracleMaxFree", 0);
    o.solver.threads = ctx.threads;
    const DtNMatrix L = compute_dtn(sa, basis, o);
    write_dtn_csv(ctx.file(ctx.prefix(c) + "dtn.csv"), L);
    write_dtn(ctx.file(ctx.prefix(c) + "dtn.dld"), L);
    const double herm = hermitian_symmetry_defect(L.entries), tr = symmetry_defect(L.entries);
    Json& s = ctx.summary(c);
    s["size"] = L.entries.rows();
    s["symmetryDefect"] = herm;
    s["transposeDefect"] = tr;
    s["digest"] = L.potentialsDigest;
    s["fromCache"] = L.fromCache;
    ctx.check(c, "symmetryDefect", herm, "<=");
    ctx.check(c, "transposeDefect", tr, "<=");
}

// ---------------------------------------------------------------- alessandrini

void run_alessandrini(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const std::vector<int> refine = p.ints("refinements", std::vector<int>{1});
    const ComplexField f1 = complex_data(p, "f1", "f1imag", c, ctx.seed, 1.0);
    const ComplexField f2 = complex_data(p, "f2", "f2imag", c, ctx.seed, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<double> res;
    for (int r : refine) {
        std::vector<double> L;
        std::vector<int> n;
        for (int a = 0; a < c.dim; ++a) {
            L.push_back(c.extents[a]);
            n.push_back(c.mesh->cells_along(a) * r);
        }
        Mesh m = build_graded_box(L, n, c.mesh->grading_ratio());
        if (c.mesh->tag_predicate_name() != "default") apply_named_tags(m, c.mesh->tag_predicate_name());
        auto mesh = std::make_shared<const Mesh>(std::move(m));
        AssemblyOptions ao;
        ao.threads = ctx.threads;
        const AlessandriniResult a =
            alessandrini_residual(mesh, c.weight, c.p1, c.p2, f1, f2, ao, SolverOptions{true, 1e-10, ctx.threads});
        rows.push_back({static_cast<double>(n[0]), mesh->max_spacing(0), a.lhs.real(), a.lhs.imag(), a.rhs.real(),
                        a.rhs.imag(), a.residual, a.absolute});
        res.push_back(a.residual);
    }
    write_csv(ctx.file(ctx.prefix(c) + "alessandrini.csv"),
              {"n", "h", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "absolute"}, rows);
    Json& s = ctx.summary(c);
    s["residuals"] = res;
    s["finestResidual"] = res.back();
    const double mono = max_ratio(res), worst = *std::max_element(res.begin(), res.end());
    s["monotoneRatio"] = mono;
    ctx.check(c, "finestResidual", res.back(), "<=");
    ctx.check(c, "monotoneRatio", mono, "<=");
    ctx.check(c, "maxResidual", worst, "<=");
}

// ---------------------------------------------------------------- cgo-decay

void run_cgo_decay(Context& ctx, const Case& c) {
    const Params& p = c.params;
    RemainderOptions ro;
    ro.bc = remainder_bc_from_string(p.str("bc", "MinimalNorm"));
    ro.shift = p.num("shift", 1.0);
    const SweepReport rep =
        decay_sweep(p.nums("k"), c.weight.s, c.p1.V, c.p1.q, p.nums("taus"), c.mesh, ro, ctx.threads);
    std::vector<std::vector<double>> rows;
    for (const auto& pt : rep.points) rows.push_back({pt.tau, pt.l2w, pt.h1w, pt.l2Sigma1, pt.residual});
    write_csv(ctx.file(ctx.prefix(c) + "decay.csv"), {"tau", "l2w", "h1w", "l2_sigma1", "residual"}, rows);
    Json& s = ctx.summary(c);
    s["slopes"] = {rep.slopeL2, rep.slopeH1, rep.slopeSigma1};
    s["targetRates"] = {rep.targetL2, rep.targetH1, rep.targetSigma1};
    s["bc"] = rep.bcMode;
    s["trivial"] = rep.trivial;
    ctx.check(c, "slopeL2", rep.slopeL2, "<=");
    ctx.check(c, "slopeH1", rep.slopeH1, "<=");
    ctx.check(c, "slopeSigma1", rep.slopeSigma1, "<=");
}

// ---------------------------------------------------------------- carleman

void run_carleman(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const int fields = p.integer("fields", 5);
    std::vector<unsigned> seeds;
    for (int f = 0; f < fields; ++f) seeds.push_back(static_cast<unsigned>(ctx.seed) + static_cast<unsigned>(f));
    const CarlemanSweep sw = carleman_sweep(c.weight.s, p.nums("taus"), seeds, c.p1.V, c.p1.q, c.mesh,
                                            p.num("qSmall", 1.0), ctx.threads);
    std::vector<std::vector<double>> rows;
    for (std::size_t f = 0; f < sw.ratios.size(); ++f)
        for (std::size_t t = 0; t < sw.taus.size(); ++t)
            rows.push_back({static_cast<double>(seeds[f]), sw.taus[t], sw.ratios[f][t]});
    write_csv(ctx.file(ctx.prefix(c) + "carleman.csv"), {"seed", "tau", "ratio"}, rows);
    Json& s = ctx.summary(c);
    s["skipped"] = sw.skipped;
    if (sw.skipped) s["warning"] = sw.warning;
    s["slopes"] = sw.slopes;
    const double m = sw.skipped ? std::numeric_limits<double>::quiet_NaN() : sw.maxSlope;
    s["maxSlope"] = sw.skipped ? Json(nullptr) : Json(m);
    ctx.check(c, "maxSlope", m, "<=");
}

// ---------------------------------------------------------------- traces

void run_traces(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const std::vector<double> mus = p.nums("mus", std::vector<double>{1.0, 1.7783, 3.1623, 5.6234, 10.0});
    const std::vector<int> refine = p.ints("refinements", std::vector<int>{1, 2});
    const int fields = p.integer("fields", 5), modes = p.integer("fieldModes", 6);
    const double mu0 = p.num("mu0", 1.0);
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    Json& s = ctx.summary(c);
    for (const std::string& name : p.strs("modes", {"Unweighted", "Weighted"})) {
        const TraceMode mode = trace_mode_from_string(name);
        std::vector<double> constants;
        for (int r : refine) {
            std::vector<double> L;
            std::vector<int> n;
            for (int a = 0; a < c.dim; ++a) {
                L.push_back(c.extents[a]);
                n.push_back(c.mesh->cells_along(a) * r);
            }
            const Mesh mesh = build_graded_box(L, n, c.mesh->grading_ratio());
            double C = 0.0;
            for (int f = 0; f < fields; ++f) {
                const RealField g = random_smooth(ctx.seed + static_cast<std::uint64_t>(f), 1.0, modes, c.extents, c.dim);
                VectorXc u(mesh.num_vertices());
                for (int v = 0; v < mesh.num_vertices(); ++v) u(v) = g(mesh.vertex(v));
                for (double mu : mus) C = std::max(C, trace_inequality_ratio(mesh, u, mu, c.weight.s, mode, mu0));
            }
            constants.push_back(C);
            rows.push_back({mode == TraceMode::Weighted ? 1.0 : 0.0, static_cast<double>(n[0]), C});
        }
        double var = 0.0;
        for (std::size_t i = 1; i < constants.size(); ++i)
            var = std::max(var, std::abs(constants[i] - constants[i - 1]) / constants[i - 1]);
        s[name]["constants"] = constants;
        s[name]["variation"] = var;
        worst = std::max(worst, var);
    }
    write_csv(ctx.file(ctx.prefix(c) + "traces.csv"), {"weighted", "n", "constant"}, rows);
    s["maxVariation"] = worst;
    ctx.check(c, "maxVariation", worst, "<=");
    if (c.spec.value("checks", Json::object()).contains("constantRatioError")) {
        // u = 1 on the unit square at mu = 10: ||u||_boundary = 2, combination 10
        const Mesh unit = build_graded_box({1.0, 1.0}, {8, 8}, 1.0);
        const double r =
            trace_inequality_ratio(unit, VectorXc::Ones(unit.num_vertices()), 10.0, 0.5, TraceMode::Unweighted);
        s["constantRatio"] = r;
        ctx.check(c, "constantRatioError", std::abs(r - 0.2), "<=");
    }
}

// ---------------------------------------------------------------- runge

void run_runge(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const int N = p.integer("N", 64);
    const DictionaryFamily fam = dictionary_family_from_string(p.str("family", "hats"));
    const std::string topo = p.str("topology", "L2");
    if (topo != "L2" && topo != "H1bulk") invalid("params.topology", "expected L2 or H1bulk");
    const BulkTopology topology = topo == "L2" ? BulkTopology::L2 : BulkTopology::H1bulk;
    const double alpha = p.num("alpha", -1.0);
    AssemblyOptions ao;
    ao.threads = ctx.threads;
    auto sa = make_assembly(c.mesh, c.weight, c.p1, 0.0, ao);
    const SubBox omega1 = centered_subbox(*c.mesh, p.num("fraction", 0.25));
    const unsigned seed = static_cast<unsigned>(ctx.seed);
    const Dictionary d = build_dictionary(sa, N, fam, omega1, seed, ctx.threads, SolverOptions{true, 1e-10, ctx.threads});
    const FitMetrics fm = fit_metrics(d, topology);
    Json& s = ctx.summary(c);

    const double interior = dictionary_interior_residual(d);
    s["interiorResidual"] = interior;
    ctx.check(c, "interiorResidual", interior, "<=");

    // targets inside the span are reproduced
    std::mt19937_64 rng(ctx.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXc coef(N);
    for (int j = 0; j < N; ++j) coef(j) = cplx(normal(rng), normal(rng));
    const VectorXc inSpan = d.solutions * coef;
    const double span = simultaneous_fit(d, fm, inSpan, inSpan, 0.0).combinedError;
    s["spanReproduction"] = span;
    ctx.check(c, "spanReproduction", span, "<=");

    const RealField bt = p.has("boundaryTarget") ? parse_field(p.raw("boundaryTarget"), c.extents, c.dim, ctx.seed)
                                                 : constant_field(1.0);
    VectorXc t1(c.mesh->num_vertices());
    for (int v = 0; v < c.mesh->num_vertices(); ++v) t1(v) = bt(c.mesh->vertex(v));
    const BulkTarget t2 = bulk_target(*sa, omega1, seed);
    s["bulkTargetResidual"] = t2.residual;

    std::vector<int> prefixes = p.ints("prefixes", std::vector<int>{N / 8, N / 4, N / 2, N});
    std::vector<std::vector<double>> rows;
    std::vector<double> errs;
    for (int n : prefixes) {
        if (n < 1 || n > N) invalid("params.prefixes", "entries must lie in [1, N]");
        const FitReport r = simultaneous_fit(d, fm, t1, t2.u, alpha, n);
        rows.push_back({static_cast<double>(n), r.boundaryError, r.bulkError, r.combinedError, r.conditionEstimate});
        errs.push_back(r.combinedError);
    }
    write_csv(ctx.file(ctx.prefix(c) + "runge.csv"),
              {"N", "boundary_error", "bulk_error", "combined_error", "condition"}, rows);
    double mono = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < errs.size(); ++i) mono = std::max(mono, (errs[i] - errs[i - 1]) / errs[i - 1]);
    s["combinedErrors"] = errs;
    s["monotoneDefect"] = errs.size() > 1 ? Json(mono) : Json(nullptr);
    if (errs.size() > 1) ctx.check(c, "monotoneDefect", mono, "<=");
    s["combinedError"] = errs.back();
    ctx.check(c, "combinedError", errs.back(), "<");

    if (p.flag("liouville", true) && c.mesh->dim() >= 2) {
        const double lv = liouville_check(*c.mesh, t2.u, omega1, c.weight, c.p1.V);
        s["liouville"] = lv;
        ctx.check(c, "liouville", lv, "<=");
    }
}

// ---------------------------------------------------------------- reconstruct

void reconstruct_phase_only(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const double s = c.weight.s;
    const double bw = p.num("bandwidth");
    const FrequencyGrid grid = default_grid(c.dim, bw, p.num("verticalBandwidth", bw), p.integer("gridN", 33));
    TransformQuadrature quad;
    quad.panels = p.integer("panels", quad.panels);
    quad.points = p.integer("points", quad.points);
    quad.maxPanels = p.integer("maxPanels", quad.maxPanels);
    const FrequencySamples samples = sample_phase_only(c.p1, c.p2, s, c.extents, c.dim, grid, quad, ctx.threads);
    ReconstructOptions ro;
    ro.gridPoints = p.integer("gridPoints", ro.gridPoints);
    ro.bandwidth = p.num("declaredBandwidth", 0.0);
    ro.bandFraction = p.num("bandFraction", ro.bandFraction);
    ro.leakageTolerance = p.num("leakageTolerance", ro.leakageTolerance);
    const Reconstruction rec = s == 0.5 ? recover_V_fixed_q(samples, ro) : recover_V_and_q(samples, ro);
    const ReconstructionError err = reconstruction_error(rec, difference(c.p1.V, c.p2.V), difference(c.p1.q, c.p2.q));
    const double rt = round_trip_residual(rec, samples, quad);

    std::vector<std::vector<double>> rows;
    for (int f = 0; f < grid.size(); ++f) {
        std::vector<double> r = grid.k_at(f);
        r.push_back(samples.values[f].real());
        r.push_back(samples.values[f].imag());
        rows.push_back(r);
    }
    std::vector<std::string> head{"k1", "k2"};
    if (c.dim == 3) head.push_back("k3");
    head.push_back("re");
    head.push_back("im");
    write_csv(ctx.file(ctx.prefix(c) + "samples.csv"), head, rows);
    rows.clear();
    const int g = static_cast<int>(rec.axes[0].size());
    for (std::size_t i = 0; i < rec.V.size(); ++i) {
        std::vector<double> r;
        int idx = static_cast<int>(i);
        for (int a = 0; a < c.dim; ++a) {
            const int n = static_cast<int>(rec.axes[a].size());
            r.push_back(rec.axes[a][idx % n]);
            idx /= n;
        }
        r.push_back(rec.V[i]);
        rows.push_back(r);
    }
    head.resize(c.dim);
    for (int a = 0; a < c.dim; ++a) head[a] = "x" + std::to_string(a + 1);
    head.push_back("V");
    write_csv(ctx.file(ctx.prefix(c) + "V.csv"), head, rows);
    if (!rec.q.empty()) {
        rows.clear();
        for (std::size_t i = 0; i < rec.q.size(); ++i) {
            std::vector<double> r;
            int idx = static_cast<int>(i);
            for (int a = 0; a + 1 < c.dim; ++a) {
                r.push_back(rec.axes[a][idx % g]);
                idx /= g;
            }
            r.push_back(rec.q[i]);
            rows.push_back(r);
        }
        head.resize(c.dim - 1);
        head.push_back("q");
        write_csv(ctx.file(ctx.prefix(c) + "q.csv"), head, rows);
    }
    Json& sm = ctx.summary(c);
    sm["errorV"] = err.V;
    sm["hermitianDefect"] = samples.hermitian_defect();
    sm["roundTrip"] = rt;
    sm["imagResidueV"] = rec.imagResidueV;
    sm["geometryDigest"] = samples.geometryDigest;
    ctx.check(c, "errorV", err.V, "<");
    ctx.check(c, "roundTrip", rt, "<=");
    ctx.check(c, "hermitianDefect", samples.hermitian_defect(), "<=");
    if (!rec.q.empty()) {
        sm["errorQ"] = err.q;
        sm["leakage"] = rec.leakage;
        ctx.check(c, "errorQ", err.q, "<");
    }
}

void reconstruct_exact_gap(Context& ctx, const Case& c) {
    const Params& p = c.params;
    const std::vector<double> k = p.nums("k");
    if (static_cast<int>(k.size()) != c.dim) invalid("params.k", "needs one entry per axis");
    ExactCGOOptions eo;
    eo.remainder.bc = remainder_bc_from_string(p.str("bc", "MinimalNorm"));
    eo.solver.threads = ctx.threads;
    const cplx phase = phase_only_pairing(c.p1, c.p2, c.weight.s, c.extents, c.dim, k);
    std::vector<std::vector<double>> rows;
    std::vector<double> gaps;
    for (double tau : p.nums("taus")) {
        const ExactCGOPairing e = exact_cgo_pairing(c.mesh, c.weight.s, c.p1, c.p2, k, tau, eo);
        const double gap = std::abs(e.value - phase) / std::abs(phase);
        rows.push_back({tau, e.value.real(), e.value.imag(), phase.real(), phase.imag(), gap, e.remainderResidual});
        gaps.push_back(gap);
    }
    write_csv(ctx.file(ctx.prefix(c) + "gap.csv"),
              {"tau", "exact_re", "exact_im", "phase_re", "phase_im", "relative_gap", "remainder_residual"}, rows);
    Json& s = ctx.summary(c);
    s["gaps"] = gaps;
    const double growth = max_ratio(gaps), decrease = gaps.back() / gaps.front();
    s["gapGrowth"] = growth;
    s["gapDecrease"] = decrease;
    ctx.check(c, "gapGrowth", growth, "<=");
    ctx.check(c, "gapDecrease", decrease, "<");
}

void run_reconstruct(Context& ctx, const Case& c) {
    const std::string study = c.spec.value("study", std::string("phase-only"));
    if (study == "phase-only") return reconstruct_phase_only(ctx, c);
    if (study == "exact-gap") return reconstruct_exact_gap(ctx, c);
    invalid("study", "unknown reconstruct study '" + study + "'");
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read '" + p.string() + "'");
    Sha256 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest man;
    man.name = config.name;
    man.command = config.command;
    man.summary = Json::object();

    ExperimentConfig effective = config;
    if (opts.seed) effective.seed = *opts.seed;
    {
        Sha256 h;
        h.update(to_json(effective).dump());
        man.configDigest = h.hex();
    }
    const auto& allowed = known_checks().at(config.command);
    for (int i = 0; i < num_cases(config); ++i) {
        const Json checks = resolve_case(config, i).value("checks", Json::object());
        for (auto it = checks.begin(); it != checks.end(); ++it)
            if (it.key() != "maxSeconds" && !allowed.count(it.key()))
                invalid("checks." + it.key(), "not a check of command '" + config.command + "'");
    }

    std::error_code ec;
    fs::create_directories(opts.outDir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + opts.outDir + "'");
    Context ctx(effective, opts, man);
    using Runner = void (*)(Context&, const Case&);
    static const std::map<std::string, Runner> runners = {
        {"forward", run_forward},   {"dtn", run_dtn},           {"alessandrini", run_alessandrini},
        {"runge", run_runge},       {"cgo-decay", run_cgo_decay}, {"carleman", run_carleman},
        {"traces", run_traces},     {"reconstruct", run_reconstruct},
    };
    for (int i = 0; i < num_cases(config); ++i) {
        const Case c = ctx.make_case(i);
        man.cacheKeys.push_back(ctx.key_for(c));
        try {
            runners.at(config.command)(ctx, c);
        } catch (const Error& e) {
            if (!ctx.multi) throw;
            throw Error(e.kind(), "case '" + c.name + "': " + e.what());
        }
    }
    man.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (config.raw.contains("checks") && config.raw["checks"].contains("maxSeconds")) {
        Check k{"maxSeconds", "<=", man.seconds, config.raw["checks"]["maxSeconds"].get<double>(), false};
        k.passed = k.value <= k.threshold;
        man.checks.push_back(k);
    }

    {
        std::ofstream out(fs::path(opts.outDir) / "summary.json");
        Json s = man.summary;
        s["checks"] = Json::array();
        for (const auto& c : man.checks) s["checks"].push_back({{"name", c.name}, {"passed", c.passed}});
        out << s.dump(2) << '\n';
        if (!out) throw Error(ErrorKind::IoError, "cannot write summary.json");
    }
    std::vector<std::string> files = ctx.files();
    files.push_back("summary.json");
    for (const auto& f : files) {
        const fs::path p = fs::path(opts.outDir) / f;
        man.artifacts.push_back(Artifact{f, file_digest(p), fs::file_size(p)});
    }
    std::ofstream out(fs::path(opts.outDir) / "manifest.json");
    out << man.to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorKind::IoError, "cannot write manifest.json");
    return man;
}

RunManifest run_file(const std::string& configPath, const RunOptions& opts) {
    return run(load_config(configPath), opts);
}

}  // namespace degenlab::app
