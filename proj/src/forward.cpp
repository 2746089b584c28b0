#include "degenlab/forward.hpp"

#include <cmath>
#include <random>

#include <Eigen/IterativeLinearSolvers>

#include "degenlab/error.hpp"
#include "degenlab/norms.hpp"
#include "degenlab/parallel.hpp"

namespace degenlab {

namespace {


// Eigenvalue of (K, M) nearest to `offset`, given solve(b) = (K - offset M)^{-1} b.
template <class SolveFn>
EigenResult subspace_iteration(const SparseC& K, const SparseC& M, double offset, SolveFn&& solve) {
    const int n = static_cast<int>(K.rows());
    if (n == 0) throw Error(ErrorKind::EigsolverNoConvergence, "no free degrees of freedom");
    const int p = std::min(6, n);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    MatrixXc X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = cplx(normal(rng), 0.0);
    EigenResult res;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int it = 1; it <= 500; ++it) {
        MatrixXc Y(n, p);
        const MatrixXc MX = M * X;
        for (int j = 0; j < p; ++j) Y.col(j) = solve(VectorXc(MX.col(j)));
        Eigen::HouseholderQR<MatrixXc> qr(Y);
        const MatrixXc Q = qr.householderQ() * MatrixXc::Identity(n, p);
        MatrixXc Kp = Q.adjoint() * (K * Q);
        MatrixXc Mp = Q.adjoint() * (M * Q);
        Kp = 0.5 * (Kp + Kp.adjoint()).eval();
        Mp = 0.5 * (Mp + Mp.adjoint()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc> ges(Kp, Mp);
        if (ges.info() != Eigen::Success) throw Error(ErrorKind::EigsolverNoConvergence, "Rayleigh-Ritz failed");
        int best = 0;
        for (int j = 1; j < p; ++j)
            if (std::abs(ges.eigenvalues()(j) - offset) < std::abs(ges.eigenvalues()(best) - offset)) best = j;
        X = Q * ges.eigenvectors();
        const double mu = ges.eigenvalues()(best);
        const VectorXc x = X.col(best);
        const VectorXc Kx = K * x, Mx = M * x;
        const double r = (Kx - mu * Mx).norm() / (Kx.norm() + std::abs(mu) * Mx.norm() + 1e-300);
        res.eigenvalue = mu;
        res.iterations = it;
        res.residual = r;
        if (r < 1e-10 || (it > 3 && std::abs(mu - prev) <= 1e-14 * (1.0 + std::abs(mu)))) return res;
        prev = mu;
    }
    throw Error(ErrorKind::EigsolverNoConvergence, "shift-invert subspace iteration did not converge");
}

}  // namespace

std::shared_ptr<SystemAssembly> make_assembly(std::shared_ptr<const Mesh> mesh, const WeightSpec& ws,
                                              const Potentials& pots, double lambda, const AssemblyOptions& opts) {
    return std::make_shared<SystemAssembly>(assemble(std::move(mesh), ws, pots, lambda, opts));
}

ForwardSolver::ForwardSolver(std::shared_ptr<const SystemAssembly> assembly, const SolverOptions& opts)
    : sa_(std::move(assembly)), opts_(opts) {
    const SystemAssembly& sa = *sa_;
    KFF_ = sparse_block(sa.matrix, sa.freeDofs, sa.freeDofs);
    KFD_ = sparse_block(sa.matrix, sa.freeDofs, sa.dirichletDofs);
    MFF_ = sparse_block(sa.mass, sa.freeDofs, sa.freeDofs);
    if (KFF_.rows() == 0) return;
    KFF_.makeCompressed();
    if (!lu_.compute(KFF_)) useIterative_ = true;
    if (opts_.eigenGuard) {
        const double lambda = sa.lambdaShift;
        const double tol = 1e-8 * (1.0 + std::abs(lambda));
        EigenResult er;
        if (!useIterative_) {
            er = nearest_eigenvalue();
        } else {
            // exactly singular factorization: probe with a slightly perturbed shift
            const double delta = 1e-6 * (1.0 + std::abs(lambda));
            SparseC Kd = KFF_ - delta * MFF_;
            SparseDirect lu2;
            if (!lu2.compute(Kd))
                throw Error(ErrorKind::ZeroIsEigenvalue, "constrained operator is singular");
            er = subspace_iteration(KFF_, MFF_, 0.0, [&](const VectorXc& b) { return lu2.solve(b); });
            er.eigenvalue += lambda;
        }
        if (std::abs(er.eigenvalue - lambda) <= tol)
            throw Error(ErrorKind::ZeroIsEigenvalue, "lambda = " + std::to_string(lambda) +
                                                         " is within guard distance of discrete eigenvalue " +
                                                         std::to_string(er.eigenvalue));
    }
}

EigenResult ForwardSolver::nearest_eigenvalue() const {
    EigenResult er = subspace_iteration(KFF_, MFF_, 0.0, [&](const VectorXc& b) { return solve_free(b); });
    er.eigenvalue += sa_->lambdaShift;
    return er;
}

VectorXc ForwardSolver::solve_free(const VectorXc& b) const {
    if (!useIterative_) {
        return lu_.solve(b);
    }
    Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<cplx>> it;
    it.setTolerance(opts_.iterativeTol);
    it.setMaxIterations(20000);
    it.compute(KFF_);
    VectorXc x = it.solve(b);
    if (it.info() != Eigen::Success) throw Error(ErrorKind::SolverBreakdown, "iterative fallback failed");
    return x;
}

VectorXc ForwardSolver::load_vector(const MixedData& data) const { return assemble_load(*sa_, data); }

VectorXc assemble_load(const SystemAssembly& sa, const MixedData& data) {
    const Mesh& mesh = *sa.mesh;
    const int dim = mesh.dim();
    VectorXc b = VectorXc::Zero(mesh.num_vertices());
    if (data.F0 || data.Ftilde) {
        const WeightFunction wf(mesh, sa.weightSpec);
        const RuleOrders orders{sa.options.orders.order + 2, sa.options.orders.smoothOrder + 4};
        for (int c = 0; c < mesh.num_cells(); ++c) {
            if (!sa.options.cellMask.empty() && !sa.options.cellMask[c]) continue;
            const Point lo = mesh.cell_lower(c), hi = mesh.cell_upper(c);
            const auto cv = mesh.cell_vertices(c);
            for (const auto& qp : cell_rule(mesh, wf, c, orders)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                const cplx f0 = data.F0 ? data.F0(qp.x) : cplx(0.0);
                std::array<cplx, 3> ft{};
                if (data.Ftilde) ft = data.Ftilde(qp.x);
                for (int l = 0; l < e.n; ++l) {
                    cplx v = f0 * e.val[l];
                    for (int a = 0; a < dim; ++a) v += ft[a] * e.grad[l][a];
                    b(cv[l]) += qp.w * v;
                }
            }
        }
    }
    if (data.f1) {
        for (const auto& f : mesh.facets()) {
            if (f.tag != BoundaryTag::Sigma1) continue;
            const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
            const auto cv = mesh.cell_vertices(f.cell);
            for (const auto& qp : facet_rule(mesh, f, sa.options.orders.order + 2)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                const cplx g = data.f1(qp.x);
                for (int l = 0; l < e.n; ++l) b(cv[l]) += qp.w * g * e.val[l];
            }
        }
    }
    return b;
}

Solution ForwardSolver::solve(const MixedData& data) const {
    const SystemAssembly& sa = *sa_;
    const Mesh& mesh = *sa.mesh;
    const int n = mesh.num_vertices();
    if (data.f2.size() != 0 && data.f2.size() != static_cast<int>(sa.sigma2Dofs.size()))
        throw Error(ErrorKind::InvalidArgument, "f2 must have one value per Sigma2 dof");
    VectorXc uD = VectorXc::Zero(static_cast<int>(sa.dirichletDofs.size()));
    VectorXc u = VectorXc::Zero(n);
    if (data.f2.size() != 0) {
        for (std::size_t k = 0; k < sa.dirichletDofs.size(); ++k) {
            const int idx = sa.sigma2Index[sa.dirichletDofs[k]];
            if (idx >= 0) uD(static_cast<int>(k)) = data.f2(idx);
        }
    }
    const VectorXc b = load_vector(data);
    VectorXc rhs(static_cast<int>(sa.freeDofs.size()));
    for (std::size_t k = 0; k < sa.freeDofs.size(); ++k) rhs(static_cast<int>(k)) = b(sa.freeDofs[k]);
    if (uD.size() > 0) rhs -= KFD_ * uD;
    VectorXc uF = rhs.size() > 0 ? solve_free(rhs) : VectorXc();
    for (std::size_t k = 0; k < sa.freeDofs.size(); ++k) u(sa.freeDofs[k]) = uF(static_cast<int>(k));
    for (std::size_t k = 0; k < sa.dirichletDofs.size(); ++k) u(sa.dirichletDofs[k]) = uD(static_cast<int>(k));

    Solution sol;
    sol.assembly = sa_;
    sol.data = data;
    sol.u = std::move(u);
    if (rhs.size() > 0) {
        const double rn = rhs.norm();
        const double r = (KFF_ * uF - rhs).norm();
        sol.residual = rn > 0.0 ? r / rn : r;
    }
    const WeightedNorms nu = weighted_norms(mesh, sa.weightSpec, sol.u);
    double dataNorm = l2w_norm(mesh, sa.weightSpec, data.F0) + l2w_norm(mesh, sa.weightSpec, data.Ftilde) +
                      l2_sigma1_norm(mesh, data.f1);
    if (data.f2.size() != 0) {
        VectorXc tr = VectorXc::Zero(n);
        for (std::size_t k = 0; k < sa.sigma2Dofs.size(); ++k) tr(sa.sigma2Dofs[k]) = data.f2(static_cast<int>(k));
        dataNorm += boundary_l2_norm(mesh, tr, BoundaryTag::Sigma2);
    }
    sol.aprioriRatio = dataNorm > 0.0 ? nu.h1w / dataNorm : 0.0;
    return sol;
}

Solution ForwardSolver::poisson(const VectorXc& f2) const {
    MixedData d;
    d.f2 = f2;
    return solve(d);
}

MatrixXc ForwardSolver::poisson_columns(const MatrixXc& F, int threads) const {
    const SystemAssembly& sa = *sa_;
    const int n = sa.mesh->num_vertices();
    const int m = static_cast<int>(F.cols());
    MatrixXc U = MatrixXc::Zero(n, m);
    // Dirichlet part of each column
    MatrixXc UD = MatrixXc::Zero(static_cast<int>(sa.dirichletDofs.size()), m);
    for (std::size_t k = 0; k < sa.dirichletDofs.size(); ++k) {
        const int idx = sa.sigma2Index[sa.dirichletDofs[k]];
        if (idx >= 0) UD.row(static_cast<int>(k)) = F.row(idx);
    }
    const MatrixXc R = -(KFD_ * UD);
    parallel_chunks(m, threads, [&](int, int b, int e) {
        for (int j = b; j < e; ++j) {
            const VectorXc x = solve_free(R.col(j));
            for (std::size_t k = 0; k < sa.freeDofs.size(); ++k) U(sa.freeDofs[k], j) = x(static_cast<int>(k));
        }
    });
    for (std::size_t k = 0; k < sa.dirichletDofs.size(); ++k) U.row(sa.dirichletDofs[k]) = UD.row(static_cast<int>(k));
    return U;
}

Solution solve_mixed(std::shared_ptr<const SystemAssembly> assembly, const MixedData& data,
                     const SolverOptions& opts) {
    return ForwardSolver(std::move(assembly), opts).solve(data);
}

Solution poisson(std::shared_ptr<const SystemAssembly> assembly, const VectorXc& f2, const SolverOptions& opts) {
    return ForwardSolver(std::move(assembly), opts).poisson(f2);
}

double nearest_eigenvalue(std::shared_ptr<const SystemAssembly> assembly) {
    SolverOptions opts;
    opts.eigenGuard = false;
    ForwardSolver fs(std::move(assembly), opts);
    if (fs.iterative()) {
        // singular at the shift: the shift itself is an eigenvalue to working precision
        return fs.assembly().lambdaShift;
    }
    return fs.nearest_eigenvalue().eigenvalue;
}

VectorXc weighted_normal_derivative(const Solution& sol) {
    const SystemAssembly& sa = *sol.assembly;
    const Mesh& mesh = *sa.mesh;
    const VectorXc b = assemble_load(sa, sol.data);
    const VectorXc flux = sa.matrix * sol.u - sa.robin * sol.u - b;
    const auto bv = mesh.boundary_vertices();
    VectorXc out(static_cast<int>(bv.size()));
    for (std::size_t k = 0; k < bv.size(); ++k) out(static_cast<int>(k)) = flux(bv[k]);
    return out;
}

cplx normal_pairing(const Solution& sol, const VectorXc& extension) {
    const SystemAssembly& sa = *sol.assembly;
    const VectorXc b = assemble_load(sa, sol.data);
    const VectorXc flux = sa.matrix * sol.u - sa.robin * sol.u - b;
    return extension.dot(flux);  // sum conj(e_i) flux_i
}

VectorXc constrained_solve(const SparseC& K, const std::vector<int>& constrained, const VectorXc& values,
                           const VectorXc& rhs) {
    const int n = static_cast<int>(K.rows());
    std::vector<bool> isC(n, false);
    for (int v : constrained) isC[v] = true;
    std::vector<int> freeD;
    for (int v = 0; v < n; ++v)
        if (!isC[v]) freeD.push_back(v);
    const SparseC KFF = sparse_block(K, freeD, freeD);
    const SparseC KFC = sparse_block(K, freeD, constrained);
    VectorXc r(static_cast<int>(freeD.size()));
    for (std::size_t k = 0; k < freeD.size(); ++k) r(static_cast<int>(k)) = rhs.size() ? rhs(freeD[k]) : cplx(0.0);
    r -= KFC * values;
    VectorXc u = VectorXc::Zero(n);
    if (!freeD.empty()) {
        SparseDirect lu;
        if (!lu.compute(KFF)) throw Error(ErrorKind::SolverFailure, "constrained factorization failed");
        const VectorXc x = lu.solve(r);
        for (std::size_t k = 0; k < freeD.size(); ++k) u(freeD[k]) = x(static_cast<int>(k));
    }
    for (std::size_t k = 0; k < constrained.size(); ++k) u(constrained[k]) = values(static_cast<int>(k));
    return u;
}

VectorXc extend_trace(const Mesh& mesh, const WeightSpec& ws, const VectorXc& g) {
    auto meshPtr = std::make_shared<const Mesh>(mesh);
    const SystemAssembly sa = assemble(meshPtr, ws, Potentials{}, 0.0);
    const auto bv = mesh.boundary_vertices();
    if (g.size() != static_cast<int>(bv.size()))
        throw Error(ErrorKind::InvalidArgument, "trace must have one value per boundary dof");
    return constrained_solve(sa.matrix, bv, g, VectorXc());
}

}  // namespace degenlab
