#pragma once

#include <array>
#include <complex>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace degenlab {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;  // unused trailing components are zero

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using SparseC = Eigen::SparseMatrix<cplx>;
using SparseR = Eigen::SparseMatrix<double>;

using RealField = std::function<double(const Point&)>;
using ComplexField = std::function<cplx(const Point&)>;
using VectorField = std::function<Point(const Point&)>;
using ComplexVectorField = std::function<std::array<cplx, 3>(const Point&)>;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace degenlab
