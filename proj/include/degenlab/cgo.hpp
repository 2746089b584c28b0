#pragma once

#include <memory>
#include <string>
#include <vector>

#include "degenlab/assembly.hpp"
#include "degenlab/forward.hpp"
#include "degenlab/norms.hpp"

namespace degenlab {

// CGO frequency data.  The convention here is the one of the CGO model
//   div(w grad u) + w V u = 0 in Omega,  w d_d u + q u = 0 on Sigma1 (d_d inward),
// i.e. the forward form with potentials (-V, -q).
struct CGOParams {
    double s = 0.5;
    int dim = 2;
    std::vector<double> k;   // length dim
    std::vector<cplx> xi;    // length dim; vertical entry zero for s > 1/2
    std::vector<double> zeta1, zeta2;
    double tau = 0.0;        // |Re xi| = |Im xi|; |xi| = sqrt(2) tau

    double xi_norm() const;  // Hermitian norm
    // Invariant defects (all should be ~0).
    double xi_dot_xi() const;
    double xi_dot_k() const;
};

CGOParams construct_xi(const std::vector<double>& k, double tau, double s, int dim);

// Phase a(x) = exp(i k'.x' + i k_d x_d^{2s}).
cplx cgo_phase(const CGOParams& p, const Point& x);

struct CGOSource {
    // Bulk density f of the remainder equation divided by the weight,
    // so that f = w * F0 and int f v = int w F0 v.
    ComplexField F0;
    // Robin data g on Sigma1.
    ComplexField g;
    double fNorm = 0.0;  // ||f||_{L^2(x^{2s-1})} = ||F0||_{L^2(w)}
    double gNorm = 0.0;  // ||g||_{L^2(Sigma1)}
};

// f = -L(a), g = -(w d_d a + (q + xi_d) a) on Sigma1, for the conjugated
// operator L = div(w grad) + w V + 2 w xi.grad.
CGOSource cgo_source(const CGOParams& p, const RealField& V, const RealField& q, const Mesh& mesh);

// NaturalSigma2: zero weighted co-normal flux of r on Sigma2.
// ShiftedNatural: same with an added i*shift*(weighted mass) term.
// MinimalNorm: r of least semiclassical norm
//   ||r||^2_{L^2(w)} + |xi|^{-2} ||grad r||^2_{L^2(w)} + |xi|^{2s-2} ||r||^2_{L^2(Sigma1)}
// among all discrete r satisfying the weak equations for test functions that
// vanish on Sigma2; no condition is placed on r at Sigma2.
enum class RemainderBC { NaturalSigma2, ShiftedNatural, MinimalNorm };

const char* to_string(RemainderBC bc);
RemainderBC remainder_bc_from_string(const std::string& name);

struct RemainderOptions {
    RemainderBC bc = RemainderBC::MinimalNorm;
    double shift = 1.0;  // coefficient of i * weighted mass for ShiftedNatural
    RuleOrders orders{3, 8};
};

struct RemainderResult {
    VectorXc r;
    double residual = 0.0;
    int iterations = 0;  // CG steps for MinimalNorm
    double conditionEstimate = 0.0;
    WeightedNorms norms;
    SparseC matrix;  // A(i,j) = a(phi_j, phi_i)
    VectorXc rhs;
};

// Oscillation guard: h * max(|xi|, |k|) <= 2 pi / 8 on every axis the
// frequencies act on.
void check_resolution(const Mesh& mesh, const CGOParams& p);

// Bilinear form a(r, v) = int w grad r.grad v - int w V r v - 2 int w (xi.grad r) v
//                         - int_{Sigma1} (q + xi_d) r v.
SparseC assemble_remainder_operator(const Mesh& mesh, const CGOParams& p, const RealField& V, const RealField& q,
                                    const RuleOrders& orders);

RemainderResult solve_remainder(const CGOParams& p, const RealField& V, const RealField& q,
                                std::shared_ptr<const Mesh> mesh, const RemainderOptions& opts = {});

// Full CGO u = e^{xi.x}(a + r) evaluated at the mesh vertices.
VectorXc cgo_nodal(const Mesh& mesh, const CGOParams& p, const VectorXc& r);

struct SweepPoint {
    double tau = 0.0;
    double l2w = 0.0, h1w = 0.0, l2Sigma1 = 0.0;
    double residual = 0.0;
};

struct SweepReport {
    double s = 0.5;
    std::vector<double> k;
    std::vector<SweepPoint> points;
    // fitted log-log slopes vs tau for (L2w, H1w, L2(Sigma1)); NaN when trivial
    double slopeL2 = 0.0, slopeH1 = 0.0, slopeSigma1 = 0.0;
    double targetL2 = 0.0, targetH1 = 0.0, targetSigma1 = 0.0;
    bool trivial = false;
    std::string bcMode;
};

SweepReport decay_sweep(const std::vector<double>& k, double s, const RealField& V, const RealField& q,
                        const std::vector<double>& taus, std::shared_ptr<const Mesh> mesh,
                        const RemainderOptions& opts = {}, int threads = 1);

// Least-squares log-log slope using points whose log tau is in the upper half
// of the sampled range.
double upper_half_slope(const std::vector<double>& taus, const std::vector<double>& values);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace degenlab
