#pragma once

#include <memory>
#include <string>
#include <vector>

#include "degenlab/cgo.hpp"
#include "degenlab/potentials.hpp"

namespace degenlab {

enum class SampleMode { ExactCGO, PhaseOnly };
const char* to_string(SampleMode m);
SampleMode sample_mode_from_string(const std::string& name);

// Uniform grid of n points per axis (n odd), symmetric about 0, reaching
// +-kmax[a] on axis a.  The last axis is the vertical frequency.
struct FrequencyGrid {
    int dim = 2;
    int n = 33;
    std::array<double, 3> kmax{0.0, 0.0, 0.0};

    int size() const;
    double step(int axis) const;
    double value(int axis, int i) const;
    std::array<int, 3> index(int flat) const;  // axis 0 fastest
    std::vector<double> k_at(int flat) const;
};

// kmax = 1.5 * bandwidth on horizontal axes and 1.5 * verticalBandwidth on
// the vertical one.
FrequencyGrid default_grid(int dim, double bandwidth, double verticalBandwidth, int n = 33);

// Tensor quadrature for the phase-only transform.  Every axis uses at least
// `panels` Gauss-Legendre panels of `points` nodes, more when needed so that
// the phase advances by at most pi per panel.  The vertical axis adds
// `graded` geometric levels (ratio 1/2) inside the first panel, the lowest
// one Gauss-Jacobi for x_d^{1-2s}.
struct TransformQuadrature {
    int panels = 16;
    int points = 10;
    int graded = 40;
    int maxPanels = 4096;
};

struct FrequencySamples {
    FrequencyGrid grid;
    std::vector<cplx> values;
    SampleMode mode = SampleMode::PhaseOnly;
    double s = 0.5;
    double tau = 0.0;  // ExactCGO only
    Point extents{0.0, 0.0, 0.0};
    std::string geometryDigest;

    // max |T(-k) - conj T(k)|
    double hermitian_defect() const;
};

// T(k) = int_Omega (V1 - V2) x_d^{1-2s} e^{i k'.x' + i k_d x_d^{2s}}
//        + int_{Sigma1} (q1 - q2) e^{i k'.x'}
// on the box [0, extents] by separable direct summation.  Throws
// UnresolvedOscillation when resolving the largest frequency would need more
// than maxPanels panels.
FrequencySamples sample_phase_only(const Potentials& p1, const Potentials& p2, double s, const Point& extents,
                                   int dim, const FrequencyGrid& grid, const TransformQuadrature& quad = {},
                                   int threads = 1);

// The same transform at one frequency k (length dim).
cplx phase_only_pairing(const Potentials& p1, const Potentials& p2, double s, const Point& extents, int dim,
                        const std::vector<double>& k, const TransformQuadrature& quad = {});

struct ExactCGOOptions {
    RemainderOptions remainder;
    SolverOptions solver;
};

// <(Lambda_1 - Lambda_2) f1, f2> with f_j the Sigma2 traces of the CGO pair
//   u1 = e^{xi.x}(e^{i theta/2} + r1),  u2 = e^{xi~.x}(e^{-i theta/2} + r2),
// xi = tau (zeta1 + i zeta2), xi~ = tau (-zeta1 + i zeta2), theta = k'.x' + k_d x_d^{2s},
// so that u1 conj(u2) = e^{i theta} (1 + remainders).  Potentials are in the
// forward convention.  Throws DimensionTooSmall, UnresolvedOscillation.
struct ExactCGOPairing {
    cplx value = 0.0;
    double remainderResidual = 0.0;
};
ExactCGOPairing exact_cgo_pairing(std::shared_ptr<const Mesh> mesh, double s, const Potentials& p1,
                                  const Potentials& p2, const std::vector<double>& k, double tau,
                                  const ExactCGOOptions& opts = {});

// ExactCGO over a whole grid (one pairing per grid point, expensive) or
// PhaseOnly over the mesh box.
FrequencySamples sample_pairing(std::shared_ptr<const Mesh> mesh, double s, const Potentials& p1,
                                const Potentials& p2, const FrequencyGrid& grid, SampleMode mode, double tau,
                                const ExactCGOOptions& opts = {}, int threads = 1);

struct ReconstructOptions {
    int gridPoints = 32;          // cell-centred evaluation points per axis
    double bandwidth = 0.0;       // declared bandwidth of V (0 skips the check)
    double bandFraction = 0.75;   // q estimator band: |k_d| >= bandFraction * kmax_d
    double leakageTolerance = 0.05;
};

struct Reconstruction {
    int dim = 2;
    Point extents{0.0, 0.0, 0.0};
    std::vector<std::vector<double>> axes;  // evaluation points per axis
    std::vector<double> V;  // axis 0 fastest
    std::vector<double> q;  // on Sigma1 (horizontal axes), empty when not recovered
    double imagResidueV = 0.0;  // max |Im| / max |Re|
    double imagResidueQ = 0.0;
    double leakage = 0.0;       // band variation of T / max |T|
    double qHatPeak = 0.0;      // max |q^| / max |T|

    RealField V_field() const;  // multilinear interpolation, zero outside
    RealField q_field() const;
};

// s = 1/2 with q1 = q2: V1 - V2 by inverse transform.  Throws GridTooCoarse.
Reconstruction recover_V_fixed_q(const FrequencySamples& samples, const ReconstructOptions& opts = {});

// s in (1/2, 1): q^ from the top band of |k_d|, the rest inverted on
// y = (x', x_d^{2s}) and divided by y_d^{1/s-2}/(2s).  Throws BandTooNarrow,
// GridTooCoarse.
Reconstruction recover_V_and_q(const FrequencySamples& samples, const ReconstructOptions& opts = {});

struct ReconstructionError {
    double V = 0.0;  // relative L2 on the evaluation grid
    double q = 0.0;
};
ReconstructionError reconstruction_error(const Reconstruction& r, const RealField& dV, const RealField& dq);

// Relative l2 residual between samples and the phase-only transform of the
// reconstruction.
double round_trip_residual(const Reconstruction& r, const FrequencySamples& samples,
                           const TransformQuadrature& quad = {});

}  // namespace degenlab
