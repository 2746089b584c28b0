#pragma once

#include <functional>

#include "degenlab/fem.hpp"
#include "degenlab/mesh.hpp"
#include "degenlab/weight.hpp"

namespace degenlab {

struct WeightedNorms {
    double l2w = 0.0;       // ||u||_{L^2(w)}
    double h1semiw = 0.0;   // ||grad u||_{L^2(w)}
    double h1w = 0.0;       // sqrt(l2w^2 + h1semiw^2)
    double l2Sigma1 = 0.0;  // ||u||_{L^2(Sigma1)}
    double l2Boundary = 0.0;
};

inline constexpr RuleOrders kNormOrders{4, 12};

WeightedNorms weighted_norms(const Mesh& mesh, const WeightSpec& ws, const VectorXc& u,
                             const RuleOrders& orders = kNormOrders);

// Exact reference with value and gradient.
struct ExactField {
    std::function<cplx(const Point&)> value;
    std::function<std::array<cplx, 3>(const Point&)> grad;
};

// Norms of (u_h - exact).
WeightedNorms error_norms(const Mesh& mesh, const WeightSpec& ws, const VectorXc& u, const ExactField& exact,
                          const RuleOrders& orders = kNormOrders);

// ||f||_{L^2(w)} and ||F||_{L^2(w)} of analytic fields.
double l2w_norm(const Mesh& mesh, const WeightSpec& ws, const ComplexField& f,
                const RuleOrders& orders = kNormOrders);
double l2w_norm(const Mesh& mesh, const WeightSpec& ws, const ComplexVectorField& F,
                const RuleOrders& orders = kNormOrders);
double l2_sigma1_norm(const Mesh& mesh, const ComplexField& f, int order = 4);

// ||u||_{L^2} over the vertices of a dof list using the boundary mass matrix
// restricted to facets of the given tag.
double boundary_l2_norm(const Mesh& mesh, const VectorXc& u, BoundaryTag tag, int order = 4);

}  // namespace degenlab
