#pragma once

#include <vector>

namespace degenlab {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Jacobi rule for the weight t^beta on [0,1], beta > -1.  Weights
// include the weight function.
Rule1D gauss_jacobi01(int n, double beta);

// Gauss-Legendre rule on [a,b].
Rule1D gauss_legendre(int n, double a = 0.0, double b = 1.0);

// Gauss-Jacobi for t^beta with t = x - a on [a,b]; weights include (x-a)^beta.
Rule1D gauss_jacobi_left(int n, double beta, double a, double b);

// Same, singular endpoint at b: weights include (b-x)^beta.
Rule1D gauss_jacobi_right(int n, double beta, double a, double b);

// Closed-form integral of t^(1-2s) t^m over [a,b].
double weighted_cell_moment(double a, double b, double s, int m);

}  // namespace degenlab
