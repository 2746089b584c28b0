#include "degenlab/cgo.hpp"

#include <cmath>
#include <limits>
#include <random>


#include "degenlab/error.hpp"
#include "degenlab/parallel.hpp"
#include "degenlab/sparse_direct.hpp"

namespace degenlab {

double CGOParams::xi_norm() const {
    double a = 0.0;
    for (const auto& z : xi) a += std::norm(z);
    return std::sqrt(a);
}

double CGOParams::xi_dot_xi() const {
    cplx a = 0.0;
    for (const auto& z : xi) a += z * z;
    return std::abs(a);
}

double CGOParams::xi_dot_k() const {
    cplx a = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) a += xi[i] * k[i];
    return std::abs(a);
}

CGOParams construct_xi(const std::vector<double>& k, double tau, double s, int dim) {
    if (dim < 2) throw Error(ErrorKind::DimensionTooSmall, "dimension must be at least 2");
    if (static_cast<int>(k.size()) != dim) throw Error(ErrorKind::InvalidArgument, "k must have dim entries");
    if (!(s >= 0.5 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "CGO construction needs s in [1/2,1)");
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    using Vec = std::vector<double>;
    auto dot = [](const Vec& a, const Vec& b) {
        double r = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
        return r;
    };
    std::vector<Vec> constraints;
    std::vector<Vec> basis;
    auto orthogonalize = [&](Vec v) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& c : constraints) {
                const double a = dot(v, c);
                for (int i = 0; i < dim; ++i) v[i] -= a * c[i];
            }
            for (const auto& b : basis) {
                const double a = dot(v, b);
                for (int i = 0; i < dim; ++i) v[i] -= a * b[i];
            }
        }
        return v;
    };
    auto add_constraint = [&](Vec v) {
        v = orthogonalize(v);
        const double n = std::sqrt(dot(v, v));
        if (n > 1e-12) {
            for (auto& x : v) x /= n;
            constraints.push_back(v);
        }
    };
    add_constraint(k);
    if (s > 0.5) {
        Vec ed(dim, 0.0);
        ed[dim - 1] = 1.0;
        add_constraint(ed);
    }
    // horizontal directions first so the vertical component is used only when needed
    for (int a = 0; a < dim && basis.size() < 2; ++a) {
        Vec e(dim, 0.0);
        e[a] = 1.0;
        Vec v = orthogonalize(e);
        const double n = std::sqrt(dot(v, v));
        if (n > 1e-10) {
            for (auto& x : v) x /= n;
            basis.push_back(v);
        }
    }
    if (basis.size() < 2)
        throw Error(ErrorKind::DimensionTooSmall,
                    s > 0.5 ? "k-perp intersected with the horizontal plane has dimension < 2"
                            : "k-perp has dimension < 2");
    CGOParams p;
    p.s = s;
    p.dim = dim;
    p.k = k;
    p.tau = tau;
    p.zeta1 = basis[0];
    p.zeta2 = basis[1];
    p.xi.resize(dim);
    for (int i = 0; i < dim; ++i) {
        // clean round-off so exact zeros stay exact
        const double r = std::abs(basis[0][i]) < 1e-15 ? 0.0 : basis[0][i];
        const double m = std::abs(basis[1][i]) < 1e-15 ? 0.0 : basis[1][i];
        p.xi[i] = tau * cplx(r, m);
    }
    return p;
}

cplx cgo_phase(const CGOParams& p, const Point& x) {
    const int d = p.dim;
    double ph = 0.0;
    for (int a = 0; a < d - 1; ++a) ph += p.k[a] * x[a];
    const double t = x[d - 1];
    ph += p.k[d - 1] * (p.s == 0.5 ? t : std::pow(t, 2.0 * p.s));
    return std::polar(1.0, ph);
}

namespace {

double horizontal_k2(const CGOParams& p) {
    double a = 0.0;
    for (int i = 0; i < p.dim - 1; ++i) a += p.k[i] * p.k[i];
    return a;
}

}  // namespace

CGOSource cgo_source(const CGOParams& p, const RealField& V, const RealField& q, const Mesh& mesh) {
    const double s = p.s;
    const double kp2 = horizontal_k2(p);
    const double kd = p.k[p.dim - 1];
    const double c2 = (2.0 * s) * (2.0 * s) * kd * kd;
    const int d = p.dim;
    const cplx xid = p.xi[d - 1];
    CGOSource src;
    const CGOParams pc = p;
    src.F0 = [pc, V, kp2, c2, s, d](const Point& x) {
        const double t = x[d - 1];
        const double vert = s == 0.5 ? 1.0 : std::pow(t, 4.0 * s - 2.0);
        const double v = V ? V(x) : 0.0;
        return (kp2 - v + c2 * vert) * cgo_phase(pc, x);
    };
    src.g = [pc, q, s, kd, xid, d](const Point& x) {
        Point xb = x;
        xb[d - 1] = 0.0;
        const double qv = q ? q(xb) : 0.0;
        return -cgo_phase(pc, xb) * (cplx(0.0, 2.0 * s * kd) + qv + xid);
    };
    WeightSpec ws{s, WeightMode::Vertical};
    src.fNorm = l2w_norm(mesh, ws, src.F0);
    src.gNorm = l2_sigma1_norm(mesh, src.g);
    return src;
}

void check_resolution(const Mesh& mesh, const CGOParams& p) {
    double kn = 0.0;
    for (double v : p.k) kn += v * v;
    kn = std::sqrt(kn);
    const double xn = p.xi_norm();
    for (int a = 0; a < mesh.dim(); ++a) {
        const double fa = std::max(std::abs(p.xi[a]) > 0.0 ? xn : 0.0, kn);
        const double h = mesh.max_spacing(a);
        if (h * fa > 2.0 * kPi / 8.0 * (1.0 + 1e-12))
            throw Error(ErrorKind::UnresolvedOscillation,
                        "axis " + std::to_string(a) + ": spacing " + std::to_string(h) +
                            " gives fewer than 8 cells per wavelength at frequency " + std::to_string(fa));
    }
}

SparseC assemble_remainder_operator(const Mesh& mesh, const CGOParams& p, const RealField& V, const RealField& q,
                                    const RuleOrders& orders) {
    const WeightSpec ws{p.s, WeightMode::Vertical};
    const WeightFunction wf(mesh, ws);
    const int dim = mesh.dim();
    const int nloc = 1 << dim;
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(mesh.num_cells()) * nloc * nloc);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Point lo = mesh.cell_lower(c), hi = mesh.cell_upper(c);
        const auto cv = mesh.cell_vertices(c);
        cplx Al[8][8] = {};
        for (const auto& qp : cell_rule(mesh, wf, c, orders)) {
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            const double v = V ? V(qp.x) : 0.0;
            for (int j = 0; j < nloc; ++j) {
                cplx xg = 0.0;
                for (int a = 0; a < dim; ++a) xg += p.xi[a] * e.grad[j][a];
                for (int i = 0; i < nloc; ++i) {
                    double gg = 0.0;
                    for (int a = 0; a < dim; ++a) gg += e.grad[i][a] * e.grad[j][a];
                    Al[i][j] += qp.w * (gg - v * e.val[i] * e.val[j] - 2.0 * xg * e.val[i]);
                }
            }
        }
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) t.emplace_back(cv[i], cv[j], Al[i][j]);
    }
    const cplx xid = p.xi[dim - 1];
    for (const auto& f : mesh.facets()) {
        if (f.tag != BoundaryTag::Sigma1) continue;
        const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
        const auto cv = mesh.cell_vertices(f.cell);
        cplx Rl[8][8] = {};
        for (const auto& qp : facet_rule(mesh, f, orders.order)) {
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            const cplx qe = (q ? q(qp.x) : 0.0) + xid;
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) Rl[i][j] -= qp.w * qe * e.val[i] * e.val[j];
        }
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) t.emplace_back(cv[i], cv[j], Rl[i][j]);
    }
    SparseC A(mesh.num_vertices(), mesh.num_vertices());
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

const char* to_string(RemainderBC bc) {
    switch (bc) {
    case RemainderBC::NaturalSigma2: return "NaturalSigma2";
    case RemainderBC::ShiftedNatural: return "ShiftedNatural";
    case RemainderBC::MinimalNorm: return "MinimalNorm";
    }
    return "?";
}

RemainderBC remainder_bc_from_string(const std::string& name) {
    if (name == "NaturalSigma2") return RemainderBC::NaturalSigma2;
    if (name == "ShiftedNatural") return RemainderBC::ShiftedNatural;
    if (name == "MinimalNorm") return RemainderBC::MinimalNorm;
    throw Error(ErrorKind::ConfigInvalid, "unknown remainder boundary mode '" + name + "'");
}

namespace {

// Least-norm remainder.  Writing r = r0 + Z y, where y are the values on
// Sigma2 and Z extends them by solving the interior rows, every r of this form
// satisfies the constrained equations exactly; y minimizes ||r||_H by CG on
// the normal equations Z^H H Z y = -Z^H H r0.
VectorXc minimal_norm_solve(const SparseC& A, const VectorXc& rhs, const SystemAssembly& base, const CGOParams& p,
                            double& residual, int& iterations) {
    const Mesh& mesh = *base.mesh;
    const int n = mesh.num_vertices();
    std::vector<bool> onSigma2(n, false);
    for (int v : mesh.tagged_vertices(BoundaryTag::Sigma2)) onSigma2[v] = true;
    for (int v : mesh.tagged_vertices(BoundaryTag::Rest)) onSigma2[v] = true;
    std::vector<int> inner, outer;
    for (int v = 0; v < n; ++v) (onSigma2[v] ? outer : inner).push_back(v);
    const double xn = p.xi_norm();
    SparseC bmass(n, n);
    {
        std::vector<Eigen::Triplet<cplx>> t;
        const int dim = mesh.dim();
        for (const auto& f : mesh.facets()) {
            if (f.tag != BoundaryTag::Sigma1) continue;
            const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
            const auto cv = mesh.cell_vertices(f.cell);
            for (const auto& qp : facet_rule(mesh, f, 2)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                for (int i = 0; i < e.n; ++i)
                    for (int j = 0; j < e.n; ++j) t.emplace_back(cv[i], cv[j], qp.w * e.val[i] * e.val[j]);
            }
        }
        bmass.setFromTriplets(t.begin(), t.end());
    }
    const SparseC H = base.mass + (1.0 / (xn * xn)) * base.matrix + std::pow(xn, 2.0 * p.s - 2.0) * bmass;
    const SparseC AII = sparse_block(A, inner, inner);
    const SparseC AIB = sparse_block(A, inner, outer);
    SparseDirect lu;
    if (!lu.compute(AII)) throw Error(ErrorKind::NearSingular, "interior remainder operator is singular");
    const int ni = static_cast<int>(inner.size()), nb = static_cast<int>(outer.size());
    auto scatter = [&](const VectorXc& ri, const VectorXc& y) {
        VectorXc r(n);
        for (int i = 0; i < ni; ++i) r(inner[i]) = ri(i);
        for (int i = 0; i < nb; ++i) r(outer[i]) = y(i);
        return r;
    };
    auto Z = [&](const VectorXc& y) { return scatter(-lu.solve(AIB * y), y); };
    // Z^H v = v_B - AIB^H AII^{-H} v_I
    auto ZH = [&](const VectorXc& v) {
        VectorXc vi(ni), vb(nb);
        for (int i = 0; i < ni; ++i) vi(i) = v(inner[i]);
        for (int i = 0; i < nb; ++i) vb(i) = v(outer[i]);
        return VectorXc(vb - AIB.adjoint() * lu.solve_adjoint(vi));
    };
    VectorXc bi(ni);
    for (int i = 0; i < ni; ++i) bi(i) = rhs(inner[i]);
    const VectorXc r0 = scatter(lu.solve(bi), VectorXc::Zero(nb));
    VectorXc y = VectorXc::Zero(nb);
    VectorXc res = -ZH(H * r0);
    VectorXc d = res;
    double rr = res.squaredNorm();
    const double stop = 1e-20 * std::max(rr, 1e-300);
    iterations = 0;
    for (; iterations < 5000 && rr > stop; ++iterations) {
        const VectorXc Ad = ZH(H * Z(d));
        const cplx alpha = rr / d.dot(Ad);
        y += alpha * d;
        res -= alpha * Ad;
        const double rn = res.squaredNorm();
        d = res + (rn / rr) * d;
        rr = rn;
    }
    const VectorXc r = r0 + Z(y);
    const VectorXc eq = A * r - rhs;
    double num = 0.0, den = 0.0;
    for (int v : inner) {
        num += std::norm(eq(v));
        den += std::norm(rhs(v));
    }
    residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return r;
}

}  // namespace

RemainderResult solve_remainder(const CGOParams& p, const RealField& V, const RealField& q,
                                std::shared_ptr<const Mesh> meshPtr, const RemainderOptions& opts) {
    const Mesh& mesh = *meshPtr;
    if (mesh.dim() != p.dim) throw Error(ErrorKind::InvalidArgument, "mesh and CGO dimensions differ");
    check_resolution(mesh, p);
    RemainderResult res;
    res.matrix = assemble_remainder_operator(mesh, p, V, q, opts.orders);
    const WeightSpec ws{p.s, WeightMode::Vertical};
    if (opts.bc == RemainderBC::ShiftedNatural) {
        const SystemAssembly sa = assemble(meshPtr, ws, Potentials{}, 0.0, AssemblyOptions{opts.orders, 1, {}});
        res.matrix += cplx(0.0, opts.shift) * sa.mass;
    }
    const CGOSource src = cgo_source(p, V, q, mesh);
    SystemAssembly loadCtx;
    loadCtx.mesh = meshPtr;
    loadCtx.weightSpec = ws;
    loadCtx.options.orders = opts.orders;
    MixedData md;
    md.F0 = src.F0;
    md.f1 = src.g;
    res.rhs = -assemble_load(loadCtx, md);
    const int n = mesh.num_vertices();
    if (res.rhs.norm() == 0.0) {
        res.r = VectorXc::Zero(n);
        res.norms = weighted_norms(mesh, ws, res.r);
        return res;
    }
    if (opts.bc == RemainderBC::MinimalNorm) {
        const SystemAssembly base = assemble(meshPtr, ws, Potentials{}, 0.0, AssemblyOptions{opts.orders, 1, {}});
        res.r = minimal_norm_solve(res.matrix, res.rhs, base, p, res.residual, res.iterations);
        if (!(res.residual < 1e-9))
            throw Error(ErrorKind::SolverBreakdown, "remainder residual " + std::to_string(res.residual));

        res.norms = weighted_norms(mesh, ws, res.r);
        return res;
    }
    res.matrix.makeCompressed();
    SparseDirect lu;
    if (!lu.compute(res.matrix))
        throw Error(ErrorKind::NearSingular, "remainder operator factorization failed (resonant configuration)");
    res.r = lu.solve(res.rhs);
    res.residual = (res.matrix * res.r - res.rhs).norm() / res.rhs.norm();
    // condition estimate: ||A||_1 times a few steps of inverse power iteration
    double anorm = 0.0;
    for (int k = 0; k < res.matrix.outerSize(); ++k) {
        double col = 0.0;
        for (SparseC::InnerIterator it(res.matrix, k); it; ++it) col += std::abs(it.value());
        anorm = std::max(anorm, col);
    }
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    VectorXc x(n);
    for (int i = 0; i < n; ++i) x(i) = cplx(normal(rng), normal(rng));
    double inv = 0.0;
    for (int it = 0; it < 4; ++it) {
        x /= x.norm();
        VectorXc y = lu.solve(x);
        inv = y.norm();
        x = y;
    }
    res.conditionEstimate = anorm * inv;
    if (!(res.residual < 1e-9))
        throw Error(ErrorKind::SolverBreakdown, "remainder residual " + std::to_string(res.residual));
    res.norms = weighted_norms(mesh, ws, res.r);
    return res;
}

VectorXc cgo_nodal(const Mesh& mesh, const CGOParams& p, const VectorXc& r) {
    VectorXc u(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point& x = mesh.vertex(v);
        cplx e = 0.0;
        for (int a = 0; a < p.dim; ++a) e += p.xi[a] * x[a];
        u(v) = std::exp(e) * (cgo_phase(p, x) + (r.size() ? r(v) : cplx(0.0)));
    }
    return u;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / den;
}

double upper_half_slope(const std::vector<double>& taus, const std::vector<double>& values) {
    if (taus.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mid = 0.5 * (std::log(taus.front()) + std::log(taus.back()));
    std::vector<double> x, y;
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (std::log(taus[i]) >= mid - 1e-12) {
            x.push_back(taus[i]);
            y.push_back(values[i]);
        }
    if (x.size() < 2) {
        x.assign(taus.end() - 2, taus.end());
        y.assign(values.end() - 2, values.end());
    }
    return loglog_slope(x, y);
}

SweepReport decay_sweep(const std::vector<double>& k, double s, const RealField& V, const RealField& q,
                        const std::vector<double>& taus, std::shared_ptr<const Mesh> mesh,
                        const RemainderOptions& opts, int threads) {
    if (taus.size() < 3) throw Error(ErrorKind::InvalidArgument, "decay sweep needs at least 3 tau values");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1])) throw Error(ErrorKind::InvalidArgument, "tau values must increase");
    SweepReport rep;
    rep.s = s;
    rep.k = k;
    rep.bcMode = to_string(opts.bc);
    if (s == 0.5) {
        rep.targetL2 = -0.5;
        rep.targetH1 = 0.5;
        rep.targetSigma1 = 0.0;
    } else {
        rep.targetL2 = -s;
        rep.targetH1 = 1.0 - s;
        rep.targetSigma1 = 1.0 - 2.0 * s;
    }
    // guard every tau before doing any work
    for (double t : taus) check_resolution(*mesh, construct_xi(k, t, s, mesh->dim()));
    rep.points.resize(taus.size());
    parallel_chunks(static_cast<int>(taus.size()), threads, [&](int, int b, int e) {
        for (int i = b; i < e; ++i) {
            const CGOParams p = construct_xi(k, taus[i], s, mesh->dim());
            const RemainderResult rr = solve_remainder(p, V, q, mesh, opts);
            SweepPoint& sp = rep.points[i];
            sp.tau = taus[i];
            sp.l2w = rr.norms.l2w;
            sp.h1w = rr.norms.h1w;
            sp.l2Sigma1 = rr.norms.l2Sigma1;
            sp.residual = rr.residual;
        }
    });
    std::vector<double> a, b, c;
    double mx = 0.0;
    for (const auto& sp : rep.points) {
        a.push_back(sp.l2w);
        b.push_back(sp.h1w);
        c.push_back(sp.l2Sigma1);
        mx = std::max(mx, sp.h1w);
    }
    if (mx < 1e-14) {
        rep.trivial = true;
        rep.slopeL2 = rep.slopeH1 = rep.slopeSigma1 = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    rep.slopeL2 = upper_half_slope(taus, a);
    rep.slopeH1 = upper_half_slope(taus, b);
    rep.slopeSigma1 = upper_half_slope(taus, c);
    return rep;
}

}  // namespace degenlab
