#include "degenlab/dtn.hpp"

#include <cmath>
#include <filesystem>

#include "degenlab/error.hpp"
#include "degenlab/io.hpp"
#include "degenlab/norms.hpp"

namespace degenlab {

const char* to_string(BasisKind k) { return k == BasisKind::NodalHat ? "NodalHat" : "SmoothBump"; }

BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "NodalHat") return BasisKind::NodalHat;
    if (name == "SmoothBump") return BasisKind::SmoothBump;
    throw Error(ErrorKind::ConfigInvalid, "unknown trace basis '" + name + "'");
}

std::string TraceBasis::descriptor() const {
    return kind == BasisKind::NodalHat ? "NodalHat" : "SmoothBump:" + std::to_string(modes);
}

TraceBasis make_basis(const SystemAssembly& sa, BasisKind kind, int modes) {
    TraceBasis b;
    b.kind = kind;
    const int n2 = static_cast<int>(sa.sigma2Dofs.size());
    if (n2 == 0) throw Error(ErrorKind::InvalidArgument, "Sigma2 carries no dofs");
    if (kind == BasisKind::NodalHat) {
        b.values = MatrixXc::Identity(n2, n2);
        return b;
    }
    if (modes < 1) throw Error(ErrorKind::InvalidArgument, "smooth basis needs at least one mode");
    b.modes = modes;
    const Mesh& mesh = *sa.mesh;
    const int dim = mesh.dim();
    int count = 1;
    for (int a = 0; a < dim; ++a) count *= modes;
    b.values.resize(n2, count);
    const double H = mesh.extent(dim - 1);
    for (int j = 0; j < count; ++j) {
        int m[3] = {0, 0, 0}, r = j;
        for (int a = 0; a < dim; ++a) {
            m[a] = r % modes;
            r /= modes;
        }
        for (int i = 0; i < n2; ++i) {
            const Point& x = mesh.vertex(sa.sigma2Dofs[i]);
            double v = std::pow(x[dim - 1] / H, 2);
            for (int a = 0; a < dim; ++a) v *= std::cos(m[a] * kPi * x[a] / mesh.extent(a));
            b.values(i, j) = v;
        }
    }
    return b;
}

std::string dtn_digest(const SystemAssembly& sa, const TraceBasis& basis) {
    Sha256 h;
    h.update(std::string("degenlab-dtn-v1"));
    hash_mesh(h, *sa.mesh);
    h.update_pod(sa.weightSpec.s);
    h.update_pod(static_cast<int>(sa.weightSpec.mode));
    h.update_pod(sa.weightSpec.clamp);
    h.update_pod(sa.lambdaShift);
    SparseC K = sa.matrix;
    K.makeCompressed();
    h.update(K.outerIndexPtr(), sizeof(int) * static_cast<std::size_t>(K.outerSize() + 1));
    h.update(K.innerIndexPtr(), sizeof(int) * static_cast<std::size_t>(K.nonZeros()));
    h.update(K.valuePtr(), sizeof(cplx) * static_cast<std::size_t>(K.nonZeros()));
    h.update(sa.sigma2Dofs.data(), sizeof(int) * sa.sigma2Dofs.size());
    h.update(basis.descriptor());
    h.update(basis.values.data(), sizeof(cplx) * static_cast<std::size_t>(basis.values.size()));
    return h.hex();
}

MatrixXc schur_complement_oracle(const SystemAssembly& sa) {
    const MatrixXc K22 = dense_block(sa.matrix, sa.sigma2Dofs, sa.sigma2Dofs);
    if (sa.freeDofs.empty()) return K22;
    const MatrixXc KFF = dense_block(sa.matrix, sa.freeDofs, sa.freeDofs);
    const MatrixXc KF2 = dense_block(sa.matrix, sa.freeDofs, sa.sigma2Dofs);
    const MatrixXc K2F = dense_block(sa.matrix, sa.sigma2Dofs, sa.freeDofs);
    return K22 - K2F * KFF.fullPivLu().solve(KF2);
}

namespace {

MatrixXc compute_entries(const std::shared_ptr<const SystemAssembly>& sa, const TraceBasis& basis,
                         const DtNOptions& opts) {
    const ForwardSolver solver(sa, opts.solver);
    const MatrixXc U = solver.poisson_columns(basis.values, opts.threads);
    // rows of K at the Sigma2 dofs applied to each solution
    const SparseC K2 = sparse_block(sa->matrix, sa->sigma2Dofs, [&] {
        std::vector<int> all(sa->num_dofs());
        for (int i = 0; i < sa->num_dofs(); ++i) all[i] = i;
        return all;
    }());
    const MatrixXc KU = K2 * U;  // nodal pairings B(u_j, phi_b)
    return basis.values.adjoint() * KU;
}

}  // namespace

DtNMatrix compute_dtn(std::shared_ptr<const SystemAssembly> sa, const TraceBasis& basis, const DtNOptions& opts) {
    if (basis.values.rows() != static_cast<Eigen::Index>(sa->sigma2Dofs.size()))
        throw Error(ErrorKind::InvalidArgument, "trace basis does not match the Sigma2 dofs");
    DtNMatrix m;
    m.basis = basis.descriptor();
    m.sigma2Dofs = sa->sigma2Dofs;
    m.potentialsDigest = dtn_digest(*sa, basis);
    namespace fs = std::filesystem;
    fs::path file, lockPath;
    std::unique_ptr<FileLock> lock;
    if (opts.useCache) {
        const fs::path dir = opts.cacheDir.empty() ? fs::path(default_cache_dir()) : fs::path(opts.cacheDir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) {
            file = dir / (m.potentialsDigest + ".dtn");
            lockPath = dir / (m.potentialsDigest + ".lock");
            lock = std::make_unique<FileLock>(lockPath.string());
            if (fs::exists(file)) {
                try {
                    DtNMatrix c = read_dtn(file.string());
                    if (c.potentialsDigest == m.potentialsDigest && c.entries.rows() == basis.values.cols() &&
                        c.entries.cols() == basis.values.cols()) {
                        c.fromCache = true;
                        return c;
                    }
                } catch (const Error&) {
                    // unreadable entry: recompute and overwrite
                }
            }
        }
    }
    m.entries = compute_entries(sa, basis, opts);
    if (opts.oracleMaxFree > 0 && static_cast<int>(sa->freeDofs.size()) <= opts.oracleMaxFree) {
        const MatrixXc S = schur_complement_oracle(*sa);
        const MatrixXc L = basis.values.adjoint() * S * basis.values;
        const double rel = (L - m.entries).norm() / std::max(L.norm(), 1e-300);
        if (!(rel <= opts.oracleTol))
            throw Error(ErrorKind::SolverFailure,
                        "DtN disagrees with the Schur complement oracle (relative " + std::to_string(rel) + ")");
    }
    if (lock) {
        const fs::path tmp = file.string() + ".tmp";
        write_dtn(tmp.string(), m);
        fs::rename(tmp, file);
    }
    return m;
}

double symmetry_defect(const MatrixXc& L) {
    const double n = L.norm();
    return n == 0.0 ? 0.0 : (L - L.transpose()).norm() / n;
}

double hermitian_symmetry_defect(const MatrixXc& L) {
    const double n = L.norm();
    return n == 0.0 ? 0.0 : (L - L.adjoint()).norm() / n;
}

cplx dtn_difference_pairing(const ForwardSolver& s1, const ForwardSolver& s2, const VectorXc& f1,
                            const VectorXc& f2) {
    const SystemAssembly& a1 = s1.assembly();
    const SystemAssembly& a2 = s2.assembly();
    if (a1.sigma2Dofs != a2.sigma2Dofs) throw Error(ErrorKind::InvalidArgument, "solvers use different Sigma2 dofs");
    const int n2 = static_cast<int>(a1.sigma2Dofs.size());
    if (f1.size() != n2 || f2.size() != n2) throw Error(ErrorKind::InvalidArgument, "trace data size mismatch");
    const VectorXc u1 = s1.poisson(f1).u;
    const VectorXc w1 = s2.poisson(f1).u;
    VectorXc e2 = VectorXc::Zero(a1.num_dofs());
    for (int i = 0; i < n2; ++i) e2(a1.sigma2Dofs[i]) = f2(i);
    return e2.dot(a1.matrix * u1) - e2.dot(a2.matrix * w1);
}

AlessandriniResult alessandrini_residual(std::shared_ptr<const Mesh> mesh, const WeightSpec& ws,
                                         const Potentials& p1, const Potentials& p2, const ComplexField& f1,
                                         const ComplexField& f2, const AssemblyOptions& aopts,
                                         const SolverOptions& sopts) {
    auto sa1 = make_assembly(mesh, ws, p1, 0.0, aopts);
    auto sa2 = make_assembly(mesh, ws, p2, 0.0, aopts);
    const int n2 = static_cast<int>(sa1->sigma2Dofs.size());
    VectorXc g1(n2), g2(n2);
    for (int i = 0; i < n2; ++i) {
        const Point& x = mesh->vertex(sa1->sigma2Dofs[i]);
        g1(i) = f1(x);
        g2(i) = f2(x);
    }
    const ForwardSolver s1(sa1, sopts), s2(sa2, sopts);
    const VectorXc u1 = s1.poisson(g1).u;
    const VectorXc u2 = s2.poisson(g2).u;
    AlessandriniResult res;
    res.lhs = dtn_difference_pairing(s1, s2, g1, g2);

    const int dim = mesh->dim();
    const WeightFunction wf(*mesh, ws);
    cplx bulk = 0.0;
    for (int cell = 0; cell < mesh->num_cells(); ++cell) {
        for (const auto& qp : cell_rule(*mesh, wf, cell, kNormOrders)) {
            const FieldValue a = evaluate_field_in_cell(*mesh, u1, cell, qp.x);
            const FieldValue b = evaluate_field_in_cell(*mesh, u2, cell, qp.x);
            const Point A1 = p1.A_at(qp.x), A2 = p2.A_at(qp.x);
            double a2 = 0.0;
            cplx mag = 0.0;
            for (int k = 0; k < dim; ++k) {
                a2 += A1[k] * A1[k] - A2[k] * A2[k];
                mag += (A1[k] - A2[k]) * (a.value * std::conj(b.grad[k]) - std::conj(b.value) * a.grad[k]);
            }
            const double dv = p1.V_at(qp.x) - p2.V_at(qp.x) + a2;
            bulk += qp.w * (dv * a.value * std::conj(b.value) + cplx(0.0, 1.0) * mag);
        }
    }
    cplx bdry = 0.0;
    for (const auto& f : mesh->facets()) {
        if (f.tag != BoundaryTag::Sigma1) continue;
        for (const auto& qp : facet_rule(*mesh, f, kNormOrders.smoothOrder)) {
            const double dq = p1.q_at(qp.x) - p2.q_at(qp.x);
            if (dq == 0.0) continue;
            const FieldValue a = evaluate_field_in_cell(*mesh, u1, f.cell, qp.x);
            const FieldValue b = evaluate_field_in_cell(*mesh, u2, f.cell, qp.x);
            bdry += qp.w * dq * a.value * std::conj(b.value);
        }
    }
    res.rhs = bulk + bdry;
    res.absolute = std::abs(res.lhs - res.rhs);
    const double scale = std::abs(res.lhs) + std::abs(res.rhs);
    res.residual = scale > 0.0 ? res.absolute / scale : res.absolute;
    return res;
}

}  // namespace degenlab
