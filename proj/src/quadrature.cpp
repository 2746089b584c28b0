#include "degenlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <Eigen/Dense>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

// Golub-Welsch for Jacobi weight (1-x)^alpha (1+x)^beta on [-1,1].
Rule1D golub_welsch_jacobi(int n, double alpha, double beta) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one node");
    const double ab = alpha + beta;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        const double c = 2.0 * k + ab;
        if (k == 0)
            diag(k) = (beta - alpha) / (ab + 2.0);
        else
            diag(k) = (beta * beta - alpha * alpha) / (c * (c + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double c = 2.0 * k + ab;
        const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        const double den = c * c * (c + 1.0) * (c - 1.0);
        off(k - 1) = std::sqrt(num / den);
    }
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                       std::tgamma(ab + 2.0);
    if (n == 1) {
        r.nodes[0] = diag(0);
        r.weights[0] = mu0;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off.head(n - 1), Eigen::ComputeEigenvectors);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        r.weights[k] = mu0 * v0 * v0;
    }
    return r;
}

Rule1D jacobi01_uncached(int n, double beta) {
    Rule1D r = golub_welsch_jacobi(n, 0.0, beta);
    const double scale = std::pow(2.0, -1.0 - beta);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = 0.5 * (r.nodes[k] + 1.0);
        r.weights[k] *= scale;
    }
    return r;
}

}  // namespace

Rule1D gauss_jacobi01(int n, double beta) {
    if (!(beta > -1.0)) throw Error(ErrorKind::InvalidArgument, "Jacobi exponent must exceed -1");
    static std::mutex mtx;
    static std::map<std::pair<int, double>, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n, beta});
    if (it == cache.end()) it = cache.emplace(std::make_pair(n, beta), jacobi01_uncached(n, beta)).first;
    return it->second;
}

Rule1D gauss_legendre(int n, double a, double b) {
    Rule1D r = gauss_jacobi01(n, 0.0);
    for (int k = 0; k < n; ++k) r.nodes[k] = 2.0 * r.nodes[k] - 1.0;
    for (int k = 0; k < n; ++k) r.weights[k] *= 2.0;
    const double half = 0.5 * (b - a);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = a + half * (r.nodes[k] + 1.0);
        r.weights[k] *= half;
    }
    return r;
}

Rule1D gauss_jacobi_left(int n, double beta, double a, double b) {
    Rule1D r = gauss_jacobi01(n, beta);
    const double h = b - a;
    const double scale = std::pow(h, 1.0 + beta);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = a + h * r.nodes[k];
        r.weights[k] *= scale;
    }
    return r;
}

Rule1D gauss_jacobi_right(int n, double beta, double a, double b) {
    Rule1D r = gauss_jacobi01(n, beta);
    const double h = b - a;
    const double scale = std::pow(h, 1.0 + beta);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = b - h * r.nodes[k];
        r.weights[k] *= scale;
    }
    return r;
}

double weighted_cell_moment(double a, double b, double s, int m) {
    if (!(a >= 0.0 && b > a)) throw Error(ErrorKind::InvalidArgument, "moment interval must satisfy 0 <= a < b");
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0,1)");
    if (m < 0) throw Error(ErrorKind::InvalidArgument, "moment order must be nonnegative");
    const double p = m + 2.0 - 2.0 * s;
    return (std::pow(b, p) - std::pow(a, p)) / p;
}

}  // namespace degenlab
