#include "degenlab/norms.hpp"

#include <cmath>

namespace degenlab {

namespace {

WeightedNorms accumulate(const Mesh& mesh, const WeightSpec& ws, const VectorXc& u, const ExactField* exact,
                         const RuleOrders& orders) {
    const WeightFunction wf(mesh, ws);
    const int dim = mesh.dim();
    double l2 = 0.0, semi = 0.0, s1 = 0.0, bd = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Point lo = mesh.cell_lower(c), hi = mesh.cell_upper(c);
        const auto cv = mesh.cell_vertices(c);
        for (const auto& qp : cell_rule(mesh, wf, c, orders)) {
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            cplx val = 0.0;
            std::array<cplx, 3> g{};
            for (int l = 0; l < e.n; ++l) {
                val += u(cv[l]) * e.val[l];
                for (int a = 0; a < dim; ++a) g[a] += u(cv[l]) * e.grad[l][a];
            }
            if (exact) {
                val -= exact->value(qp.x);
                const auto ge = exact->grad(qp.x);
                for (int a = 0; a < dim; ++a) g[a] -= ge[a];
            }
            l2 += qp.w * std::norm(val);
            for (int a = 0; a < dim; ++a) semi += qp.w * std::norm(g[a]);
        }
    }
    for (const auto& f : mesh.facets()) {
        const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
        const auto cv = mesh.cell_vertices(f.cell);
        for (const auto& qp : facet_rule(mesh, f, orders.order)) {
            const Q1Eval e = q1_eval(dim, lo, hi, qp.x);
            cplx val = 0.0;
            for (int l = 0; l < e.n; ++l) val += u(cv[l]) * e.val[l];
            if (exact) val -= exact->value(qp.x);
            const double contrib = qp.w * std::norm(val);
            bd += contrib;
            if (f.tag == BoundaryTag::Sigma1) s1 += contrib;
        }
    }
    WeightedNorms n;
    n.l2w = std::sqrt(l2);
    n.h1semiw = std::sqrt(semi);
    n.h1w = std::sqrt(l2 + semi);
    n.l2Sigma1 = std::sqrt(s1);
    n.l2Boundary = std::sqrt(bd);
    return n;
}

}  // namespace

WeightedNorms weighted_norms(const Mesh& mesh, const WeightSpec& ws, const VectorXc& u, const RuleOrders& orders) {
    return accumulate(mesh, ws, u, nullptr, orders);
}

WeightedNorms error_norms(const Mesh& mesh, const WeightSpec& ws, const VectorXc& u, const ExactField& exact,
                          const RuleOrders& orders) {
    return accumulate(mesh, ws, u, &exact, orders);
}

double l2w_norm(const Mesh& mesh, const WeightSpec& ws, const ComplexField& f, const RuleOrders& orders) {
    if (!f) return 0.0;
    const WeightFunction wf(mesh, ws);
    double acc = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c)
        for (const auto& qp : cell_rule(mesh, wf, c, orders)) acc += qp.w * std::norm(f(qp.x));
    return std::sqrt(acc);
}

double l2w_norm(const Mesh& mesh, const WeightSpec& ws, const ComplexVectorField& F, const RuleOrders& orders) {
    if (!F) return 0.0;
    const WeightFunction wf(mesh, ws);
    double acc = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c)
        for (const auto& qp : cell_rule(mesh, wf, c, orders)) {
            const auto v = F(qp.x);
            for (int a = 0; a < mesh.dim(); ++a) acc += qp.w * std::norm(v[a]);
        }
    return std::sqrt(acc);
}

double l2_sigma1_norm(const Mesh& mesh, const ComplexField& f, int order) {
    if (!f) return 0.0;
    double acc = 0.0;
    for (const auto& fc : mesh.facets()) {
        if (fc.tag != BoundaryTag::Sigma1) continue;
        for (const auto& qp : facet_rule(mesh, fc, order)) acc += qp.w * std::norm(f(qp.x));
    }
    return std::sqrt(acc);
}

double boundary_l2_norm(const Mesh& mesh, const VectorXc& u, BoundaryTag tag, int order) {
    double acc = 0.0;
    for (const auto& f : mesh.facets()) {
        if (f.tag != tag) continue;
        const Point lo = mesh.cell_lower(f.cell), hi = mesh.cell_upper(f.cell);
        const auto cv = mesh.cell_vertices(f.cell);
        for (const auto& qp : facet_rule(mesh, f, order)) {
            const Q1Eval e = q1_eval(mesh.dim(), lo, hi, qp.x);
            cplx val = 0.0;
            for (int l = 0; l < e.n; ++l) val += u(cv[l]) * e.val[l];
            acc += qp.w * std::norm(val);
        }
    }
    return std::sqrt(acc);
}

}  // namespace degenlab
