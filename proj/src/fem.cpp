#include "degenlab/fem.hpp"

#include <algorithm>
#include <cmath>

#include "degenlab/quadrature.hpp"

namespace degenlab {

std::vector<QuadPoint> cell_rule(const Mesh& mesh, const WeightFunction& wf, int cell, const RuleOrders& orders,
                                 bool weighted) {
    const int dim = mesh.dim();
    const Point lo = mesh.cell_lower(cell), hi = mesh.cell_upper(cell);
    const WeightSpec& ws = wf.spec();
    const bool active = weighted && ws.s != 0.5;
    const double beta = ws.beta();

    std::array<Rule1D, 3> rules;
    std::array<int, 3> singular{0, 0, 0};  // -1 lower face, +1 upper face
    for (int a = 0; a < dim; ++a) {
        const bool atLower = lo[a] == 0.0;
        const bool atUpper = hi[a] == mesh.extent(a);
        const bool vertical = a == dim - 1;
        if (!active) {
            rules[a] = gauss_legendre(orders.order, lo[a], hi[a]);
        } else if (ws.mode == WeightMode::Vertical) {
            if (vertical && atLower) {
                rules[a] = gauss_jacobi_left(orders.order, beta, lo[a], hi[a]);
                singular[a] = -1;
            } else if (vertical) {
                rules[a] = gauss_legendre(orders.smoothOrder, lo[a], hi[a]);
            } else {
                rules[a] = gauss_legendre(orders.order, lo[a], hi[a]);
            }
        } else {
            if (atLower) {
                rules[a] = gauss_jacobi_left(orders.order, beta, lo[a], hi[a]);
                singular[a] = -1;
            } else if (atUpper) {
                rules[a] = gauss_jacobi_right(orders.order, beta, lo[a], hi[a]);
                singular[a] = 1;
            } else {
                rules[a] = gauss_legendre(orders.smoothOrder, lo[a], hi[a]);
            }
        }
    }
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= rules[a].nodes.size();
    std::vector<QuadPoint> out;
    out.reserve(total);
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (std::size_t q = 0; q < total; ++q) {
        std::size_t r = q;
        QuadPoint p;
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            const std::size_t na = rules[a].nodes.size();
            idx[a] = r % na;
            r /= na;
            p.x[a] = rules[a].nodes[idx[a]];
            w *= rules[a].weights[idx[a]];
        }
        if (active) {
            if (ws.mode == WeightMode::Vertical) {
                if (singular[dim - 1] == 0) w *= std::pow(p.x[dim - 1], beta);
            } else {
                double absorbed = 1.0;
                for (int a = 0; a < dim; ++a) {
                    if (singular[a] == -1) absorbed *= std::pow(p.x[a], beta);
                    if (singular[a] == 1) absorbed *= std::pow(mesh.extent(a) - p.x[a], beta);
                }
                w *= wf(p.x) / absorbed;
            }
        }
        p.w = w;
        out.push_back(p);
    }
    return out;
}

std::vector<QuadPoint> facet_rule(const Mesh& mesh, const Facet& facet, int order) {
    const int dim = mesh.dim();
    const Point lo = mesh.cell_lower(facet.cell), hi = mesh.cell_upper(facet.cell);
    std::array<Rule1D, 3> rules;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        if (a == facet.axis) continue;
        rules[a] = gauss_legendre(order, lo[a], hi[a]);
        total *= rules[a].nodes.size();
    }
    const double fixed = facet.side == 0 ? lo[facet.axis] : hi[facet.axis];
    std::vector<QuadPoint> out;
    out.reserve(total);
    for (std::size_t q = 0; q < total; ++q) {
        std::size_t r = q;
        QuadPoint p;
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            if (a == facet.axis) {
                p.x[a] = fixed;
                continue;
            }
            const std::size_t na = rules[a].nodes.size();
            const std::size_t i = r % na;
            r /= na;
            p.x[a] = rules[a].nodes[i];
            w *= rules[a].weights[i];
        }
        p.w = w;
        out.push_back(p);
    }
    return out;
}

int locate_cell(const Mesh& mesh, const Point& x) {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = 0; a < mesh.dim(); ++a) {
        const auto& c = mesh.coords(a);
        auto it = std::upper_bound(c.begin(), c.end(), x[a]);
        int i = static_cast<int>(it - c.begin()) - 1;
        i = std::clamp(i, 0, mesh.cells_along(a) - 1);
        ijk[a] = i;
    }
    return mesh.cell_index(ijk);
}

FieldValue evaluate_field_in_cell(const Mesh& mesh, const VectorXc& u, int cell, const Point& x) {
    const auto cv = mesh.cell_vertices(cell);
    const Q1Eval e = q1_eval(mesh.dim(), mesh.cell_lower(cell), mesh.cell_upper(cell), x);
    FieldValue fv;
    for (int l = 0; l < e.n; ++l) {
        const cplx c = u(cv[l]);
        fv.value += c * e.val[l];
        for (int a = 0; a < mesh.dim(); ++a) fv.grad[a] += c * e.grad[l][a];
    }
    return fv;
}

FieldValue evaluate_field(const Mesh& mesh, const VectorXc& u, const Point& x) {
    return evaluate_field_in_cell(mesh, u, locate_cell(mesh, x), x);
}

VectorXc interpolate(const Mesh& mesh, const ComplexField& f) {
    VectorXc u(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) u(v) = f(mesh.vertex(v));
    return u;
}

}  // namespace degenlab
