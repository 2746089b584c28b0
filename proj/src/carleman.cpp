#include "degenlab/carleman.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/parallel.hpp"
#include "degenlab/sparse_direct.hpp"

namespace degenlab {

CutoffTestField::CutoffTestField(const Mesh& mesh, double s, unsigned seed, int modes, double flat)
    : s_(s), dim_(mesh.dim()), flat_(flat) {
    if (!(s >= 0.5 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "test fields need s in [1/2,1)");
    if (modes < 1) throw Error(ErrorKind::InvalidArgument, "test fields need at least one mode");
    if (!(flat > 0.0 && flat < 1.0)) throw Error(ErrorKind::InvalidArgument, "flat fraction must lie in (0,1)");
    for (int a = 0; a < dim_; ++a) {
        lo_[a] = mesh.coords(a).front();
        hi_[a] = mesh.coords(a).back();
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), ph(0.0, 2.0 * kPi);
    std::uniform_int_distribution<int> freq(0, 2);
    auto draw = [&](std::vector<Mode>& out) {
        for (int m = 0; m < modes; ++m) {
            Mode md{amp(rng), ph(rng), {0.0, 0.0, 0.0}};
            for (int a = 0; a + 1 < dim_; ++a) md.kappa[a] = freq(rng) * kPi / (hi_[a] - lo_[a]);
            out.push_back(md);
        }
    };
    draw(P_);
    draw(Q_);
}

CutoffTestField::Jet CutoffTestField::poly(const std::vector<Mode>& m, const Point& x) const {
    Jet j;
    for (const auto& md : m) {
        double arg = md.phase, k2 = 0.0;
        for (int a = 0; a + 1 < dim_; ++a) {
            arg += md.kappa[a] * x[a];
            k2 += md.kappa[a] * md.kappa[a];
        }
        const double c = std::cos(arg), sn = std::sin(arg);
        j.v += md.amp * c;
        for (int a = 0; a + 1 < dim_; ++a) j.g[a] -= md.amp * md.kappa[a] * sn;
        j.lap -= md.amp * k2 * c;
    }
    return j;
}

CutoffTestField::Jet CutoffTestField::hcut(const Point& x) const {
    // product of c_a(y) = ((y - lo)(hi - y))^2 / (L/2)^4
    double c[3], d1[3], d2[3];
    for (int a = 0; a + 1 < dim_; ++a) {
        const double half = 0.5 * (hi_[a] - lo_[a]);
        const double n = 1.0 / std::pow(half, 4);
        const double p = (x[a] - lo_[a]) * (hi_[a] - x[a]);
        const double dp = hi_[a] + lo_[a] - 2.0 * x[a];
        c[a] = n * p * p;
        d1[a] = n * 2.0 * p * dp;
        d2[a] = n * (2.0 * dp * dp - 4.0 * p);
    }
    Jet j;
    j.v = 1.0;
    for (int a = 0; a + 1 < dim_; ++a) j.v *= c[a];
    for (int a = 0; a + 1 < dim_; ++a) {
        double g = d1[a], l = d2[a];
        for (int b = 0; b + 1 < dim_; ++b)
            if (b != a) {
                g *= c[b];
                l *= c[b];
            }
        j.g[a] = g;
        j.lap += l;
    }
    return j;
}

void CutoffTestField::vcut(double t, double& c, double& ct, double& ctt) const {
    const double H = hi_[dim_ - 1] - lo_[dim_ - 1];
    const double t0 = flat_ * H;
    if (t <= t0) {
        c = 1.0;
        ct = ctt = 0.0;
        return;
    }
    const double L = H - t0;
    const double y = std::min(1.0, (t - t0) / L);
    c = 1.0 - y * y * y * (10.0 - 15.0 * y + 6.0 * y * y);
    ct = -30.0 * y * y * (1.0 - y) * (1.0 - y) / L;
    ctt = -60.0 * y * (1.0 - y) * (1.0 - 2.0 * y) / (L * L);
}

double CutoffTestField::value(const Point& x) const {
    const double t = x[dim_ - 1];
    const Jet h = hcut(x), P = poly(P_, x), Q = poly(Q_, x);
    double c, ct, ctt;
    vcut(t, c, ct, ctt);
    return h.v * c * (P.v + std::pow(t, 2.0 * s_) * Q.v);
}

std::array<double, 3> CutoffTestField::grad(const Point& x) const {
    const int d = dim_ - 1;
    const double t = x[d];
    const Jet h = hcut(x), P = poly(P_, x), Q = poly(Q_, x);
    double c, ct, ctt;
    vcut(t, c, ct, ctt);
    const double t2s = std::pow(t, 2.0 * s_);
    const double phi = P.v + t2s * Q.v;
    const double phit = 2.0 * s_ * std::pow(t, 2.0 * s_ - 1.0) * Q.v;
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) g[a] = c * (h.g[a] * phi + h.v * (P.g[a] + t2s * Q.g[a]));
    g[d] = h.v * (ct * phi + c * phit);
    return g;
}

double CutoffTestField::div_w_grad_over_w(const Point& x) const {
    // horizontal: Lap'(chi phi); vertical: (w'/w) chi_t phi + chi_tt phi + 2 chi_t phi_t
    // (d_t(w d_t phi) vanishes identically for phi = P + t^{2s} Q)
    const int d = dim_ - 1;
    const double t = x[d];
    const Jet h = hcut(x), P = poly(P_, x), Q = poly(Q_, x);
    double c, ct, ctt;
    vcut(t, c, ct, ctt);
    const double t2s = std::pow(t, 2.0 * s_);
    const double phi = P.v + t2s * Q.v;
    double hl = c * (h.v * (P.lap + t2s * Q.lap) + h.lap * phi);
    for (int a = 0; a < d; ++a) hl += 2.0 * c * h.g[a] * (P.g[a] + t2s * Q.g[a]);
    double vt = 0.0;
    if (ct != 0.0 || ctt != 0.0) {
        const double phit = 2.0 * s_ * std::pow(t, 2.0 * s_ - 1.0) * Q.v;
        vt = h.v * ((1.0 - 2.0 * s_) / t * ct * phi + ctt * phi + 2.0 * ct * phit);
    }
    return hl + vt;
}

double CutoffTestField::conormal(const Point& x) const {
    Point xb = x;
    xb[dim_ - 1] = lo_[dim_ - 1];
    const Jet h = hcut(xb), Q = poly(Q_, xb);
    double c, ct, ctt;
    vcut(xb[dim_ - 1], c, ct, ctt);
    return 2.0 * s_ * h.v * c * Q.v;
}

void check_cutoff(const CutoffTestField& v, const Mesh& mesh, double tol) {
    const int dim = mesh.dim();
    double scale = 0.0;
    for (int i = 0; i < mesh.num_vertices(); ++i) scale = std::max(scale, std::abs(v.value(mesh.vertex(i))));
    scale = std::max(scale, 1.0);
    for (const auto& f : mesh.facets()) {
        if (f.axis == dim - 1 && f.side == 0) continue;
        for (const auto& qp : facet_rule(mesh, f, 3)) {
            const auto g = v.grad(qp.x);
            double gn = 0.0;
            for (int a = 0; a < dim; ++a) gn = std::max(gn, std::abs(g[a]));
            if (std::abs(v.value(qp.x)) > tol * scale || gn > tol * scale)
                throw Error(ErrorKind::CutoffViolation, "test field does not vanish to second order on the boundary "
                                                        "away from Sigma1");
        }
    }
}

namespace {

constexpr RuleOrders kCarlemanOrders{4, 6};

struct RieszContext {
    std::shared_ptr<const Mesh> mesh;
    WeightSpec ws;
    SparseC mass, stiff;
};

RieszContext make_context(std::shared_ptr<const Mesh> mesh, double s) {
    RieszContext c;
    c.mesh = mesh;
    c.ws = WeightSpec{s, WeightMode::Vertical};
    const SystemAssembly sa = assemble(mesh, c.ws, Potentials{}, 0.0, AssemblyOptions{kCarlemanOrders, 1, {}});
    c.mass = sa.mass;
    c.stiff = sa.matrix;
    return c;
}

// Both sides for several frequencies at once; the test field is evaluated
// once per quadrature point.
std::vector<CarlemanResult> evaluate(const RieszContext& ctx, const std::vector<const SparseDirect*>& lus,
                                     const CutoffTestField& v, const std::vector<CGOParams>& ps, const RealField& V,
                                     const RealField& q) {
    const Mesh& mesh = *ctx.mesh;
    const int dim = mesh.dim();
    const std::size_t np = ps.size();
    const WeightFunction wf(mesh, ctx.ws);
    std::vector<VectorXc> load(np, VectorXc::Zero(mesh.num_vertices()));
    std::vector<double> gr(np, 0.0), gb(np, 0.0);
    double l2 = 0.0, tr = 0.0;
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
        const Point lo = mesh.cell_lower(cell), hi = mesh.cell_upper(cell);
        const auto cv = mesh.cell_vertices(cell);
        for (const auto& qp : cell_rule(mesh, wf, cell, kCarlemanOrders)) {
            const double val = v.value(qp.x);
            const auto g = v.grad(qp.x);
            const double base = v.div_w_grad_over_w(qp.x) + (V ? V(qp.x) : 0.0) * val;
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            l2 += qp.w * val * val;
            for (std::size_t k = 0; k < np; ++k) {
                cplx xg = 0.0;
                double gsq = 0.0;
                for (int a = 0; a < dim; ++a) {
                    xg += ps[k].xi[a] * g[a];
                    gsq += std::norm(g[a] - ps[k].xi[a] * val);
                }
                // e^{xi.x} f / w = div(w grad v)/w - 2 xi.grad v + V v  (xi.xi = 0)
                const cplx F0 = base - 2.0 * xg;
                gr[k] += qp.w * gsq;
                for (int i = 0; i < e.n; ++i) load[k](cv[i]) += qp.w * F0 * e.val[i];
            }
        }
    }
    for (const auto& f : mesh.facets()) {
        if (f.tag != BoundaryTag::Sigma1) continue;
        for (const auto& qp : facet_rule(mesh, f, 6)) {
            const double val = v.value(qp.x);
            const double c = v.conormal(qp.x) + (q ? q(qp.x) : 0.0) * val;
            tr += qp.w * val * val;
            // e^{xi.x} g = lim w d_t v - xi_d w v + q v; xi_d != 0 only when w = 1
            for (std::size_t k = 0; k < np; ++k) gb[k] += qp.w * std::norm(c - ps[k].xi[dim - 1] * val);
        }
    }
    std::vector<CarlemanResult> out(np);
    for (std::size_t k = 0; k < np; ++k) {
        const CGOParams& p = ps[k];
        const double xn = p.xi_norm();
        const VectorXc z = lus[k]->solve(load[k]);
        const WeightedNorms zn = weighted_norms(mesh, ctx.ws, z, kCarlemanOrders);
        CarlemanResult& r = out[k];
        r.traceTerm = std::pow(xn, p.s) * std::sqrt(tr);
        r.l2Term = xn * std::sqrt(l2);
        r.gradTerm = std::sqrt(gr[k]);
        r.bulkTerm = zn.l2w + zn.h1semiw / xn;
        r.boundaryTerm = std::pow(xn, 1.0 - p.s) * std::sqrt(gb[k]);
        r.lhs = r.traceTerm + r.l2Term + r.gradTerm;
        r.rhs = r.bulkTerm + r.boundaryTerm;
        if (r.lhs == 0.0 && r.rhs == 0.0) {
            r.zero = true;
            r.ratio = std::numeric_limits<double>::quiet_NaN();
        } else {
            r.ratio = r.lhs / r.rhs;
        }
    }
    return out;
}

SparseDirect factor(const RieszContext& ctx, const CGOParams& p) {
    const double xn = p.xi_norm();
    SparseDirect lu;
    if (!lu.compute(SparseC(ctx.mass + (1.0 / (xn * xn)) * ctx.stiff)))
        throw Error(ErrorKind::SolverFailure, "semiclassical Riesz system factorization failed");
    return lu;
}

}  // namespace

CarlemanResult carleman_ratio(const CutoffTestField& v, const CGOParams& p, const RealField& V, const RealField& q,
                              std::shared_ptr<const Mesh> mesh) {
    if (p.s != v.s()) throw Error(ErrorKind::InvalidArgument, "test field and frequency data disagree on s");
    check_resolution(*mesh, p);
    check_cutoff(v, *mesh);
    const RieszContext ctx = make_context(mesh, p.s);
    const SparseDirect lu = factor(ctx, p);
    return evaluate(ctx, {&lu}, v, {p}, V, q).front();
}

CarlemanResult carleman_ratio_zero() {
    CarlemanResult r;
    r.zero = true;
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    return r;
}

CarlemanSweep carleman_sweep(double s, const std::vector<double>& taus, const std::vector<unsigned>& seeds,
                             const RealField& V, const RealField& q, std::shared_ptr<const Mesh> mesh, double qSmall,
                             int threads) {
    if (taus.size() < 3) throw Error(ErrorKind::InvalidArgument, "Carleman sweep needs at least 3 tau values");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1])) throw Error(ErrorKind::InvalidArgument, "tau values must increase");
    if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "Carleman sweep needs at least one test field");
    CarlemanSweep sw;
    sw.s = s;
    sw.taus = taus;
    const int dim = mesh->dim();
    if (s == 0.5 && q) {
        double qmax = 0.0;
        for (const auto& f : mesh->facets()) {
            if (f.tag != BoundaryTag::Sigma1) continue;
            for (const auto& qp : facet_rule(*mesh, f, 3)) qmax = std::max(qmax, std::abs(q(qp.x)));
        }
        if (qmax > qSmall) {
            sw.skipped = true;
            sw.warning = "max |q| = " + std::to_string(qmax) + " exceeds the small-potential bound " +
                         std::to_string(qSmall) + " required at s = 1/2; boundedness check skipped";
            return sw;
        }
    }
    std::vector<CGOParams> params;
    std::vector<double> kzero(dim, 0.0);
    for (double t : taus) {
        params.push_back(construct_xi(kzero, t, s, dim));
        check_resolution(*mesh, params.back());
    }
    std::vector<CutoffTestField> fields;
    for (unsigned seed : seeds) {
        fields.emplace_back(*mesh, s, seed);
        check_cutoff(fields.back(), *mesh);
    }
    const RieszContext ctx = make_context(mesh, s);
    sw.ratios.assign(fields.size(), std::vector<double>(taus.size(), 0.0));
    std::vector<SparseDirect> lus(taus.size());
    parallel_chunks(static_cast<int>(taus.size()), threads, [&](int, int b, int e) {
        for (int i = b; i < e; ++i) lus[i] = factor(ctx, params[i]);
    });
    std::vector<const SparseDirect*> lp;
    for (const auto& lu : lus) lp.push_back(&lu);
    parallel_chunks(static_cast<int>(fields.size()), threads, [&](int, int b, int e) {
        for (int f = b; f < e; ++f) {
            const auto res = evaluate(ctx, lp, fields[f], params, V, q);
            for (std::size_t i = 0; i < taus.size(); ++i) sw.ratios[f][i] = res[i].ratio;
        }
    });
    sw.maxSlope = -std::numeric_limits<double>::infinity();
    for (const auto& row : sw.ratios) {
        sw.slopes.push_back(loglog_slope(taus, row));
        sw.maxSlope = std::max(sw.maxSlope, sw.slopes.back());
    }
    return sw;
}

const char* to_string(TraceMode m) { return m == TraceMode::Unweighted ? "Unweighted" : "Weighted"; }

TraceMode trace_mode_from_string(const std::string& name) {
    if (name == "Unweighted") return TraceMode::Unweighted;
    if (name == "Weighted") return TraceMode::Weighted;
    throw Error(ErrorKind::ConfigInvalid, "unknown trace mode '" + name + "'");
}

double trace_inequality_ratio(const Mesh& mesh, const VectorXc& u, double mu, double s, TraceMode mode,
                              double mu0) {
    if (!(mu >= mu0)) throw Error(ErrorKind::InvalidArgument, "mu must be at least mu0");
    // Unweighted: mu^{-1}, mu.  Weighted: mu^{-s}, mu^{1-s}.
    const double lo = mode == TraceMode::Unweighted ? -1.0 : -s;
    const double hi = mode == TraceMode::Unweighted ? 1.0 : 1.0 - s;
    const WeightSpec ws{mode == TraceMode::Unweighted ? 0.5 : s, WeightMode::DistanceToBoundary};
    ws.validate();
    const WeightedNorms n = weighted_norms(mesh, ws, u);
    const double comb = std::pow(mu, lo) * n.h1semiw + std::pow(mu, hi) * n.l2w;
    if (comb == 0.0) return n.l2Boundary == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return n.l2Boundary / comb;
}

}  // namespace degenlab
