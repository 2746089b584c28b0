#include "degenlab/runge.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "degenlab/error.hpp"
#include "degenlab/norms.hpp"
#include "degenlab/potentials.hpp"

namespace degenlab {

bool SubBox::contains_cell(const Mesh& mesh, int cell) const {
    const auto ijk = mesh.cell_ijk(cell);
    for (int a = 0; a < mesh.dim(); ++a)
        if (ijk[a] < lo[a] || ijk[a] >= hi[a]) return false;
    return true;
}

bool SubBox::contains_vertex(const Mesh& mesh, int v) const {
    const auto ijk = mesh.vertex_ijk(v);
    for (int a = 0; a < mesh.dim(); ++a)
        if (ijk[a] < lo[a] || ijk[a] > hi[a]) return false;
    return true;
}

bool SubBox::on_box_boundary(const Mesh& mesh, int v) const {
    if (!contains_vertex(mesh, v)) return false;
    const auto ijk = mesh.vertex_ijk(v);
    for (int a = 0; a < mesh.dim(); ++a)
        if (ijk[a] == lo[a] || ijk[a] == hi[a]) return true;
    return false;
}

bool SubBox::touches_domain_boundary(const Mesh& mesh) const {
    for (int a = 0; a < mesh.dim(); ++a)
        if (lo[a] <= 0 || hi[a] >= mesh.cells_along(a)) return true;
    return false;
}

SubBox centered_subbox(const Mesh& mesh, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error(ErrorKind::InvalidArgument, "fraction must lie in (0,1)");
    SubBox b;
    for (int a = 0; a < mesh.dim(); ++a) {
        const int n = mesh.cells_along(a);
        const int m = std::max(1, static_cast<int>(std::lround(fraction * n)));
        b.lo[a] = (n - m) / 2;
        b.hi[a] = b.lo[a] + m;
    }
    if (b.touches_domain_boundary(mesh))
        throw Error(ErrorKind::SubdomainTouchesBoundary, "centered sub-box reaches the boundary; refine the mesh");
    return b;
}

const char* to_string(DictionaryFamily f) {
    switch (f) {
    case DictionaryFamily::Hats: return "hats";
    case DictionaryFamily::Bumps: return "bumps";
    case DictionaryFamily::RandomSmooth: return "random-smooth";
    }
    return "?";
}

DictionaryFamily dictionary_family_from_string(const std::string& name) {
    if (name == "hats") return DictionaryFamily::Hats;
    if (name == "bumps") return DictionaryFamily::Bumps;
    if (name == "random-smooth") return DictionaryFamily::RandomSmooth;
    throw Error(ErrorKind::ConfigInvalid, "unknown dictionary family '" + name + "'");
}

namespace {

double radical_inverse(unsigned k) {
    double r = 0.0, f = 0.5;
    while (k) {
        if (k & 1u) r += f;
        k >>= 1;
        f *= 0.5;
    }
    return r;
}

// Positions 0..n-1 in van der Corput order.
std::vector<int> vdc_order(int n) {
    std::vector<int> order;
    std::vector<bool> used(n, false);
    unsigned m = 1;
    while (static_cast<int>(m) < n) m <<= 1;
    for (unsigned k = 0; k < 4 * m && static_cast<int>(order.size()) < n; ++k) {
        const int p = std::min(n - 1, static_cast<int>(radical_inverse(k) * n));
        if (!used[p]) {
            used[p] = true;
            order.push_back(p);
        }
    }
    for (int p = 0; p < n; ++p)
        if (!used[p]) order.push_back(p);
    return order;
}

// Seeded cosine series with frequencies below 8 per axis and 1/(1+|n|) decay.
RealField cosine_series(unsigned seed, const Point& ext, int dim) {
    constexpr int kFreq = 8;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    int count = 1;
    for (int a = 0; a < dim; ++a) count *= kFreq;
    std::vector<double> c(count);
    for (int m = 0; m < count; ++m) {
        int r = m, sum = 0;
        for (int a = 0; a < dim; ++a) {
            sum += r % kFreq;
            r /= kFreq;
        }
        c[m] = normal(rng) / (1.0 + sum);
    }
    return [=](const Point& x) {
        double v = 0.0;
        for (int m = 0; m < count; ++m) {
            int r = m;
            double p = c[m];
            for (int a = 0; a < dim; ++a) {
                p *= std::cos(kPi * (r % kFreq) * x[a] / ext[a]);
                r /= kFreq;
            }
            v += p;
        }
        return v;
    };
}

std::vector<int> omega1_vertices(const Mesh& mesh, const SubBox& b) {
    std::vector<int> out;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (b.contains_vertex(mesh, v)) out.push_back(v);
    return out;
}

std::vector<bool> cell_mask(const Mesh& mesh, const SubBox& b) {
    std::vector<bool> m(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) m[c] = b.contains_cell(mesh, c);
    return m;
}

VectorXc gather(const VectorXc& u, const std::vector<int>& idx) {
    VectorXc out(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<int>(i)) = u(idx[i]);
    return out;
}

}  // namespace

MatrixXc dictionary_inputs(const SystemAssembly& sa, int N, DictionaryFamily family, unsigned seed, double width) {
    const Mesh& mesh = *sa.mesh;
    const int n2 = static_cast<int>(sa.sigma2Dofs.size());
    if (N < 1) throw Error(ErrorKind::InvalidArgument, "dictionary size must be positive");
    if (family != DictionaryFamily::RandomSmooth && N > n2)
        throw Error(ErrorKind::InvalidArgument, "dictionary size exceeds the number of Sigma2 dofs");
    const int dim = mesh.dim();
    const double H = mesh.extent(dim - 1);
    double diam = 0.0;
    Point ext{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        ext[a] = mesh.extent(a);
        diam += ext[a] * ext[a];
    }
    diam = std::sqrt(diam);
    const std::vector<int> order = vdc_order(n2);
    MatrixXc F = MatrixXc::Zero(n2, N);
    for (int j = 0; j < N; ++j) {
        if (family == DictionaryFamily::Hats) {
            F(order[j], j) = 1.0;
            continue;
        }
        RealField f;
        if (family == DictionaryFamily::Bumps) {
            f = gaussian_bump(1.0, mesh.vertex(sa.sigma2Dofs[order[j]]), width * diam);
        } else {
            f = cosine_series(seed + static_cast<unsigned>(j), ext, dim);
        }
        for (int i = 0; i < n2; ++i) {
            const Point& x = mesh.vertex(sa.sigma2Dofs[i]);
            F(i, j) = f(x) * std::pow(x[dim - 1] / H, 2);
        }
    }
    return F;
}

Dictionary build_dictionary(std::shared_ptr<const SystemAssembly> sa, int N, DictionaryFamily family,
                            const SubBox& omega1, unsigned seed, int threads, const SolverOptions& opts) {
    const Mesh& mesh = *sa->mesh;
    if (omega1.touches_domain_boundary(mesh))
        throw Error(ErrorKind::SubdomainTouchesBoundary, "Omega1 must stay away from the boundary");
    Dictionary d;
    d.assembly = sa;
    d.family = family;
    d.omega1 = omega1;
    d.inputs = dictionary_inputs(*sa, N, family, seed);
    const ForwardSolver solver(sa, opts);
    d.solutions = solver.poisson_columns(d.inputs, threads);
    d.sigma1Dofs = sa->sigma1Dofs;
    d.omega1Dofs = omega1_vertices(mesh, omega1);
    d.onSigma1.resize(static_cast<int>(d.sigma1Dofs.size()), N);
    d.onOmega1.resize(static_cast<int>(d.omega1Dofs.size()), N);
    for (int j = 0; j < N; ++j) {
        d.onSigma1.col(j) = gather(d.solutions.col(j), d.sigma1Dofs);
        d.onOmega1.col(j) = gather(d.solutions.col(j), d.omega1Dofs);
    }
    return d;
}

double dictionary_interior_residual(const Dictionary& d) {
    const Mesh& mesh = *d.assembly->mesh;
    std::vector<int> inner;
    for (int v : d.omega1Dofs)
        if (!d.omega1.on_box_boundary(mesh, v)) inner.push_back(v);
    double worst = 0.0;
    for (int j = 0; j < d.size(); ++j) {
        const VectorXc u = d.solutions.col(j);
        const VectorXc r = d.assembly->matrix * u;
        double num = 0.0, den = 0.0;
        for (int v : inner) num += std::norm(r(v));
        const VectorXc ku = d.assembly->matrix.cwiseAbs() * u.cwiseAbs().cast<cplx>();
        for (int v : inner) den += std::norm(ku(v));
        if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
    }
    return worst;
}

BulkTarget bulk_target(const SystemAssembly& sa, const SubBox& omega1, unsigned seed, const ComplexField& g) {
    const Mesh& mesh = *sa.mesh;
    if (omega1.touches_domain_boundary(mesh))
        throw Error(ErrorKind::SubdomainTouchesBoundary, "Omega1 must stay away from the boundary");
    AssemblyOptions ao = sa.options;
    ao.cellMask = cell_mask(mesh, omega1);
    const SystemAssembly local = assemble(sa.mesh, sa.weightSpec, sa.potentials, sa.lambdaShift, ao);
    ComplexField data = g;
    if (!data) {
        Point ext{0, 0, 0};
        for (int a = 0; a < mesh.dim(); ++a) ext[a] = mesh.extent(a);
        const RealField r = random_smooth(seed, 1.0, 4, ext, mesh.dim());
        data = [r](const Point& x) { return cplx(r(x)); };
    }
    std::vector<int> constrained;
    std::vector<cplx> vals;
    std::vector<int> inner;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!omega1.contains_vertex(mesh, v)) {
            constrained.push_back(v);
            vals.push_back(0.0);
        } else if (omega1.on_box_boundary(mesh, v)) {
            constrained.push_back(v);
            vals.push_back(data(mesh.vertex(v)));
        } else {
            inner.push_back(v);
        }
    }
    VectorXc values(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) values(static_cast<int>(i)) = vals[i];
    BulkTarget t;
    t.u = constrained_solve(local.matrix, constrained, values, VectorXc());
    const VectorXc r = local.matrix * t.u;
    const VectorXc s = local.matrix.cwiseAbs() * t.u.cwiseAbs().cast<cplx>();
    double num = 0.0, den = 0.0;
    for (int v : inner) {
        num += std::norm(r(v));
        den += std::norm(s(v));
    }
    t.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return t;
}

FitMetrics fit_metrics(const Dictionary& d, BulkTopology topology) {
    const SystemAssembly& sa = *d.assembly;
    const Mesh& mesh = *sa.mesh;
    FitMetrics m;
    // Sigma1 Gram matrix
    {
        const int n1 = static_cast<int>(d.sigma1Dofs.size());
        std::vector<int> pos(mesh.num_vertices(), -1);
        for (int i = 0; i < n1; ++i) pos[d.sigma1Dofs[i]] = i;
        MatrixXc G = MatrixXc::Zero(n1, n1);
        const int dim = mesh.dim();
        for (const auto& f : mesh.facets()) {
            if (f.tag != BoundaryTag::Sigma1) continue;
            const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
            const auto cv = mesh.cell_vertices(f.cell);
            for (const auto& qp : facet_rule(mesh, f, 2)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                for (int i = 0; i < e.n; ++i)
                    for (int j = 0; j < e.n; ++j)
                        if (pos[cv[i]] >= 0 && pos[cv[j]] >= 0)
                            G(pos[cv[i]], pos[cv[j]]) += qp.w * e.val[i] * e.val[j];
            }
        }
        Eigen::LLT<MatrixXc> llt(G);
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::NearSingular, "Sigma1 Gram matrix is singular");
        m.L1 = llt.matrixU();
    }
    {
        AssemblyOptions ao = sa.options;
        ao.cellMask = cell_mask(mesh, d.omega1);
        const SystemAssembly loc = assemble(sa.mesh, sa.weightSpec, Potentials{}, 0.0, ao);
        MatrixXc G = dense_block(loc.mass, d.omega1Dofs, d.omega1Dofs);
        if (topology == BulkTopology::H1bulk) G += dense_block(loc.matrix, d.omega1Dofs, d.omega1Dofs);
        Eigen::LLT<MatrixXc> llt(G);
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::NearSingular, "Omega1 Gram matrix is singular");
        m.L2 = llt.matrixU();
    }
    return m;
}

namespace {
// Pivots below this fraction of the largest one are treated as zero.
constexpr double kRankTolerance = 1e-13;
}  // namespace

FitReport simultaneous_fit(const Dictionary& d, const VectorXc& target1, const VectorXc& target2, double alpha,
                           BulkTopology topology, int prefix) {
    return simultaneous_fit(d, fit_metrics(d, topology), target1, target2, alpha, prefix);
}

FitReport simultaneous_fit(const Dictionary& d, const FitMetrics& m, const VectorXc& target1,
                           const VectorXc& target2, double alpha, int prefix) {
    const int N = prefix < 0 ? d.size() : std::min(prefix, d.size());
    if (N < 1) throw Error(ErrorKind::InvalidArgument, "empty dictionary prefix");
    const int nv = d.assembly->num_dofs();
    if (target1.size() != nv || target2.size() != nv)
        throw Error(ErrorKind::InvalidArgument, "targets must be full nodal vectors");
    const MatrixXc A1 = m.L1 * d.onSigma1.leftCols(N);
    const MatrixXc A2 = m.L2 * d.onOmega1.leftCols(N);
    const VectorXc b1 = m.L1 * gather(target1, d.sigma1Dofs);
    const VectorXc b2 = m.L2 * gather(target2, d.omega1Dofs);
    const int r1 = static_cast<int>(A1.rows()), r2 = static_cast<int>(A2.rows());
    FitReport rep;
    rep.N = N;
    if (alpha < 0.0) {
        MatrixXc A(r1 + r2, N);
        A << A1, A2;
        const Eigen::BDCSVD<MatrixXc> svd(A);
        const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        alpha = 1e-10 * smax * smax;
    }
    rep.alpha = alpha;
    const int extra = alpha > 0.0 ? N : 0;
    MatrixXc A = MatrixXc::Zero(r1 + r2 + extra, N);
    VectorXc b = VectorXc::Zero(r1 + r2 + extra);
    A.topRows(r1) = A1;
    A.middleRows(r1, r2) = A2;
    if (extra) A.bottomRows(N) = std::sqrt(alpha) * MatrixXc::Identity(N, N);
    b.head(r1) = b1;
    b.segment(r1, r2) = b2;
    // column equilibration before the truncated SVD
    Eigen::VectorXd scale(N);
    for (int j = 0; j < N; ++j) {
        const double n = A.col(j).norm();
        scale(j) = n > 0.0 ? 1.0 / n : 1.0;
    }
    const MatrixXc As = A * scale.asDiagonal();
    Eigen::BDCSVD<MatrixXc> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankTolerance);
    rep.coefficients = scale.asDiagonal() * svd.solve(b);
    const auto& sv = svd.singularValues();
    rep.conditionEstimate = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    rep.illConditioned = !(rep.conditionEstimate < 1e12);
    const double e1 = (A1 * rep.coefficients - b1).norm(), e2 = (A2 * rep.coefficients - b2).norm();
    const double t1 = b1.norm(), t2 = b2.norm();
    rep.boundaryError = t1 > 0.0 ? e1 / t1 : e1;
    rep.bulkError = t2 > 0.0 ? e2 / t2 : e2;
    rep.combinedResidualSq = e1 * e1 + e2 * e2;
    const double tt = t1 * t1 + t2 * t2;
    rep.combinedError = tt > 0.0 ? std::sqrt(rep.combinedResidualSq / tt) : std::sqrt(rep.combinedResidualSq);
    return rep;
}

namespace {

struct RhoJet {
    double rho = 1.0;
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    double q = 0.0;  // Lap rho / rho
};

RhoJet rho_jet(const WeightFunction& wf, int dim, const Point& x) {
    const double b = 0.5 * wf.spec().beta();
    RhoJet j;
    if (b == 0.0) return j;
    if (wf.spec().mode == WeightMode::Vertical) {
        const double t = x[dim - 1];
        j.rho = std::pow(t, b);
        j.grad[dim - 1] = b * std::pow(t, b - 1.0);
        j.q = b * (b - 1.0) / (t * t);
        return j;
    }
    // distance weight: central differences of d^b
    const double eta = 1e-4 * wf.clamp();
    auto rho = [&](const Point& y) { return std::pow(wf.distance(y), b); };
    j.rho = rho(x);
    double lap = 0.0;
    for (int a = 0; a < dim; ++a) {
        Point p = x, m = x;
        p[a] += eta;
        m[a] -= eta;
        const double rp = rho(p), rm = rho(m);
        j.grad[a] = (rp - rm) / (2.0 * eta);
        lap += (rp - 2.0 * j.rho + rm) / (eta * eta);
    }
    j.q = lap / j.rho;
    return j;
}

}  // namespace

double liouville_check(const Mesh& mesh, const VectorXc& u, const SubBox& box, const WeightSpec& ws,
                       const RealField& V) {
    if (box.touches_domain_boundary(mesh))
        throw Error(ErrorKind::SubdomainTouchesBoundary, "Liouville check needs a strictly interior sub-box");
    const int dim = mesh.dim();
    const WeightFunction wf(mesh, ws);
    const WeightFunction flat(mesh, WeightSpec{0.5, ws.mode});
    VectorXc R = VectorXc::Zero(mesh.num_vertices()), S = VectorXc::Zero(mesh.num_vertices());
    for (int cell = 0; cell < mesh.num_cells(); ++cell) {
        if (!box.contains_cell(mesh, cell)) continue;
        const Point lo = mesh.cell_lower(cell), hi = mesh.cell_upper(cell);
        const auto cv = mesh.cell_vertices(cell);
        for (const auto& qp : cell_rule(mesh, flat, cell, RuleOrders{4, 4}, false)) {
            const FieldValue f = evaluate_field_in_cell(mesh, u, cell, qp.x);
            const RhoJet rj = rho_jet(wf, dim, qp.x);
            const cplx w = rj.rho * f.value;
            std::array<cplx, 3> gw{};
            for (int a = 0; a < dim; ++a) gw[a] = rj.rho * f.grad[a] + f.value * rj.grad[a];
            const double pot = rj.q + (V ? V(qp.x) : 0.0);
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            for (int i = 0; i < e.n; ++i) {
                cplx gg = 0.0;
                double ga = 0.0;
                for (int a = 0; a < dim; ++a) {
                    gg += gw[a] * e.grad[i][a];
                    ga += std::abs(gw[a]) * std::abs(e.grad[i][a]);
                }
                R(cv[i]) += qp.w * (gg + pot * w * e.val[i]);
                S(cv[i]) += qp.w * (ga + std::abs(pot * w) * e.val[i]);
            }
        }
    }
    double num = 0.0, den = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!box.contains_vertex(mesh, v) || box.on_box_boundary(mesh, v)) continue;
        num += std::norm(R(v));
        den += std::norm(S(v));
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace degenlab
