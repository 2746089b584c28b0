#pragma once

#include <vector>

#include "degenlab/mesh.hpp"
#include "degenlab/weight.hpp"

namespace degenlab {

struct QuadPoint {
    Point x{0, 0, 0};
    double w = 0.0;  // includes the weight function when requested
};

struct RuleOrders {
    int order = 2;        // Gauss points per axis where the integrand is polynomial
    int smoothOrder = 8;  // points per axis where the weight is smooth but not polynomial
};

// Quadrature for integrals of f(x) * weight(x) (weighted = true) or f(x) over
// one cell.  Cells touching the degenerate face use Gauss-Jacobi rules that
// absorb the singular factor exactly.
std::vector<QuadPoint> cell_rule(const Mesh& mesh, const WeightFunction& wf, int cell, const RuleOrders& orders,
                                 bool weighted = true);

// Surface Gauss rule on a boundary facet (no weight).
std::vector<QuadPoint> facet_rule(const Mesh& mesh, const Facet& facet, int order);

// Multilinear shape functions on an axis-aligned cell.
struct Q1Eval {
    int n = 0;
    double val[8];
    double grad[8][3];
};

inline Q1Eval q1_eval(int dim, const Point& lo, const Point& hi, const Point& x) {
    Q1Eval e;
    e.n = 1 << dim;
    double t[3][2], dt[3][2];
    for (int a = 0; a < dim; ++a) {
        const double h = hi[a] - lo[a];
        t[a][1] = (x[a] - lo[a]) / h;
        t[a][0] = 1.0 - t[a][1];
        dt[a][1] = 1.0 / h;
        dt[a][0] = -1.0 / h;
    }
    for (int l = 0; l < e.n; ++l) {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= t[a][(l >> a) & 1];
        e.val[l] = v;
        for (int a = 0; a < 3; ++a) e.grad[l][a] = 0.0;
        for (int a = 0; a < dim; ++a) {
            double g = dt[a][(l >> a) & 1];
            for (int b = 0; b < dim; ++b)
                if (b != a) g *= t[b][(l >> b) & 1];
            e.grad[l][a] = g;
        }
    }
    return e;
}

// Locate the cell containing x (clamped to the box).
int locate_cell(const Mesh& mesh, const Point& x);

// Evaluate a nodal coefficient field and its gradient at x.
struct FieldValue {
    cplx value{0.0, 0.0};
    std::array<cplx, 3> grad{};
};
FieldValue evaluate_field(const Mesh& mesh, const VectorXc& u, const Point& x);
FieldValue evaluate_field_in_cell(const Mesh& mesh, const VectorXc& u, int cell, const Point& x);

// Nodal interpolant of a function.
VectorXc interpolate(const Mesh& mesh, const ComplexField& f);

}  // namespace degenlab
