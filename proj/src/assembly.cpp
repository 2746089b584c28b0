#include "degenlab/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "degenlab/error.hpp"
#include "degenlab/parallel.hpp"

namespace degenlab {

int default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

void check_tangential(const Mesh& mesh, const VectorField& A, int order) {
    double worst = 0.0, scale = 0.0;
    for (const auto& f : mesh.facets()) {
        for (const auto& qp : facet_rule(mesh, f, order)) {
            const Point a = A(qp.x);
            worst = std::max(worst, std::abs(a[f.axis]));
        }
    }
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point a = A(mesh.vertex(v));
        for (int k = 0; k < 3; ++k) scale = std::max(scale, std::abs(a[k]));
    }
    if (worst > 1e-8 * (1.0 + scale))
        throw Error(ErrorKind::InvalidArgument, "magnetic potential must be tangential on the boundary");
}

}  // namespace

SystemAssembly assemble(std::shared_ptr<const Mesh> meshPtr, const WeightSpec& ws, const Potentials& pots,
                        double lambda, const AssemblyOptions& opts) {
    const Mesh& mesh = *meshPtr;
    ws.validate();
    if (pots.has_A() && ws.s != 0.5)
        throw Error(ErrorKind::MagneticWithDegenerateWeight, "magnetic terms are assembled only for s = 1/2");
    if (pots.has_A()) check_tangential(mesh, pots.A, opts.orders.order + 2);
    for (const auto& f : mesh.facets()) {
        if (f.tag != BoundaryTag::Sigma1 && f.tag != BoundaryTag::Sigma2 && f.tag != BoundaryTag::Rest)
            throw Error(ErrorKind::UnknownTag, "facet carries an unknown tag");
        if (f.tag == BoundaryTag::Sigma1 && !(f.axis == mesh.dim() - 1 && f.side == 0))
            throw Error(ErrorKind::UnknownTag, "Sigma1 facets must lie in the bottom face");
    }
    if (!opts.cellMask.empty() && static_cast<int>(opts.cellMask.size()) != mesh.num_cells())
        throw Error(ErrorKind::InvalidArgument, "cell mask size mismatch");

    SystemAssembly sa;
    sa.mesh = meshPtr;
    sa.weightSpec = ws;
    sa.potentials = pots;
    sa.lambdaShift = lambda;
    sa.options = opts;

    const WeightFunction wf(mesh, ws);
    const int dim = mesh.dim();
    const int nloc = 1 << dim;
    const int ncells = mesh.num_cells();
    const int nthreads = std::max(1, opts.threads);
    std::vector<Triplets> kT(nthreads), mT(nthreads);

    parallel_chunks(ncells, nthreads, [&](int chunk, int begin, int end) {
        Triplets& kt = kT[chunk];
        Triplets& mt = mT[chunk];
        kt.reserve(static_cast<std::size_t>(end - begin) * nloc * nloc);
        mt.reserve(static_cast<std::size_t>(end - begin) * nloc * nloc);
        cplx Kl[8][8];
        double Ml[8][8];
        for (int c = begin; c < end; ++c) {
            if (!opts.cellMask.empty() && !opts.cellMask[c]) continue;
            const Point lo = mesh.cell_lower(c), hi = mesh.cell_upper(c);
            const auto cv = mesh.cell_vertices(c);
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    Kl[i][j] = 0.0;
                    Ml[i][j] = 0.0;
                }
            for (const auto& qp : cell_rule(mesh, wf, c, opts.orders)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                const double V = pots.V_at(qp.x);
                const Point A = pots.A_at(qp.x);
                const double A2 = A[0] * A[0] + A[1] * A[1] + A[2] * A[2];
                double adg[8];
                for (int j = 0; j < nloc; ++j) {
                    adg[j] = 0.0;
                    for (int a = 0; a < dim; ++a) adg[j] += A[a] * e.grad[j][a];
                }
                for (int i = 0; i < nloc; ++i) {
                    for (int j = 0; j < nloc; ++j) {
                        double gg = 0.0;
                        for (int a = 0; a < dim; ++a) gg += e.grad[i][a] * e.grad[j][a];
                        const double mm = e.val[i] * e.val[j];
                        const double re = gg + (V + A2 - lambda) * mm;
                        const double im = -e.val[i] * adg[j] + e.val[j] * adg[i];
                        Kl[i][j] += qp.w * cplx(re, im);
                        Ml[i][j] += qp.w * mm;
                    }
                }
            }
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    kt.emplace_back(cv[i], cv[j], Kl[i][j]);
                    mt.emplace_back(cv[i], cv[j], cplx(Ml[i][j], 0.0));
                }
        }
    });

    Triplets rT;
    if (pots.has_q()) {
        for (const auto& f : mesh.facets()) {
            if (f.tag != BoundaryTag::Sigma1) continue;
            if (!opts.cellMask.empty() && !opts.cellMask[f.cell]) continue;
            const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
            const auto cv = mesh.cell_vertices(f.cell);
            double Rl[8][8] = {};
            for (const auto& qp : facet_rule(mesh, f, opts.orders.order)) {
                const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
                const double q = pots.q(qp.x);
                for (int i = 0; i < nloc; ++i)
                    for (int j = 0; j < nloc; ++j) Rl[i][j] += qp.w * q * e.val[i] * e.val[j];
            }
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j)
                    if (Rl[i][j] != 0.0) rT.emplace_back(cv[i], cv[j], cplx(Rl[i][j], 0.0));
        }
    }

    const int n = mesh.num_vertices();
    Triplets all, allM;
    for (auto& t : kT) all.insert(all.end(), t.begin(), t.end());
    for (auto& t : mT) allM.insert(allM.end(), t.begin(), t.end());
    all.insert(all.end(), rT.begin(), rT.end());
    sa.matrix.resize(n, n);
    sa.matrix.setFromTriplets(all.begin(), all.end());
    sa.mass.resize(n, n);
    sa.mass.setFromTriplets(allM.begin(), allM.end());
    sa.robin.resize(n, n);
    sa.robin.setFromTriplets(rT.begin(), rT.end());

    sa.sigma1Dofs = mesh.tagged_vertices(BoundaryTag::Sigma1);
    sa.restDofs = mesh.tagged_vertices(BoundaryTag::Rest);
    const auto s2 = mesh.tagged_vertices(BoundaryTag::Sigma2);
    std::set_difference(s2.begin(), s2.end(), sa.restDofs.begin(), sa.restDofs.end(),
                        std::back_inserter(sa.sigma2Dofs));
    std::set_union(sa.sigma2Dofs.begin(), sa.sigma2Dofs.end(), sa.restDofs.begin(), sa.restDofs.end(),
                   std::back_inserter(sa.dirichletDofs));
    sa.freeIndex.assign(n, -1);
    sa.sigma2Index.assign(n, -1);
    std::vector<bool> isDir(n, false);
    for (int v : sa.dirichletDofs) isDir[v] = true;
    for (int v = 0; v < n; ++v)
        if (!isDir[v]) {
            sa.freeIndex[v] = static_cast<int>(sa.freeDofs.size());
            sa.freeDofs.push_back(v);
        }
    for (std::size_t k = 0; k < sa.sigma2Dofs.size(); ++k) sa.sigma2Index[sa.sigma2Dofs[k]] = static_cast<int>(k);
    return sa;
}

double hermitian_defect(const SparseC& K) {
    const SparseC D = K - SparseC(K.adjoint());
    const double nk = K.norm();
    return nk == 0.0 ? 0.0 : D.norm() / nk;
}

SparseC sparse_block(const SparseC& K, const std::vector<int>& rows, const std::vector<int>& cols) {
    std::vector<int> rmap(K.rows(), -1), cmap(K.cols(), -1);
    for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<int>(i);
    for (std::size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<int>(j);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int k = 0; k < K.outerSize(); ++k)
        for (SparseC::InnerIterator it(K, k); it; ++it) {
            const int r = rmap[it.row()], c = cmap[it.col()];
            if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
        }
    SparseC B(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

MatrixXc dense_block(const SparseC& K, const std::vector<int>& rows, const std::vector<int>& cols) {
    return MatrixXc(sparse_block(K, rows, cols));
}

}  // namespace degenlab
