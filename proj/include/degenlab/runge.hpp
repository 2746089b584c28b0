#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "degenlab/forward.hpp"

namespace degenlab {

// Cell-index box [lo, hi) per axis.
struct SubBox {
    std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
    bool contains_cell(const Mesh& mesh, int cell) const;
    bool contains_vertex(const Mesh& mesh, int v) const;      // closed box
    bool on_box_boundary(const Mesh& mesh, int v) const;      // closed box boundary
    bool touches_domain_boundary(const Mesh& mesh) const;
};

// Centered sub-box covering `fraction` of the cells along every axis.
// Throws SubdomainTouchesBoundary if it would reach the boundary.
SubBox centered_subbox(const Mesh& mesh, double fraction = 0.25);

enum class DictionaryFamily { Hats, Bumps, RandomSmooth };
const char* to_string(DictionaryFamily f);
DictionaryFamily dictionary_family_from_string(const std::string& name);

struct Dictionary {
    std::shared_ptr<const SystemAssembly> assembly;
    DictionaryFamily family = DictionaryFamily::Hats;
    SubBox omega1;
    MatrixXc inputs;     // Sigma2 data, one column per member
    MatrixXc solutions;  // full nodal solutions
    std::vector<int> sigma1Dofs, omega1Dofs;
    MatrixXc onSigma1, onOmega1;  // restrictions
    int size() const { return static_cast<int>(inputs.cols()); }
};

// Sigma2 inputs: Hats are nodal hats in van der Corput order over the Sigma2
// dofs; Bumps are Gaussian bumps (width `width` times the box diameter)
// centered at the same ordered dofs; RandomSmooth uses seeds seed, seed+1, ...
// All non-hat inputs carry the factor (x_d/H)^2.  Prefixes of larger
// dictionaries equal smaller dictionaries.
MatrixXc dictionary_inputs(const SystemAssembly& sa, int N, DictionaryFamily family, unsigned seed = 1,
                           double width = 0.1);

Dictionary build_dictionary(std::shared_ptr<const SystemAssembly> sa, int N, DictionaryFamily family,
                            const SubBox& omega1, unsigned seed = 1, int threads = 1,
                            const SolverOptions& opts = {});

// Max over members of the relative residual of the equations at vertices
// strictly inside Omega1.
double dictionary_interior_residual(const Dictionary& d);

struct BulkTarget {
    VectorXc u;  // nodal values, zero outside Omega1
    double residual = 0.0;
};

// Local Dirichlet problem on Omega1 with boundary data g, or with seeded
// random smooth data when g is empty.
BulkTarget bulk_target(const SystemAssembly& sa, const SubBox& omega1, unsigned seed, const ComplexField& g = {});

enum class BulkTopology { L2, H1bulk };

struct FitReport {
    VectorXc coefficients;
    double boundaryError = 0.0;  // relative L2(Sigma1)
    double bulkError = 0.0;      // relative L2(Omega1, w) or H1(Omega1, w)
    double combinedError = 0.0;  // sqrt((r1^2 + r2^2) / (t1^2 + t2^2))
    double combinedResidualSq = 0.0;
    double alpha = 0.0;
    int N = 0;
    double conditionEstimate = 0.0;
    bool illConditioned = false;
};

// Fit metrics on one mesh and sub-box; reused across fits.
struct FitMetrics {
    MatrixXc L1, L2;  // Cholesky factors of the Sigma1 and Omega1 Gram matrices
};
FitMetrics fit_metrics(const Dictionary& d, BulkTopology topology);

// Least squares over the dictionary coefficients of
//   ||D c - t1||^2_{L2(Sigma1)} + ||E c - t2||^2_{bulk} + alpha ||c||^2.
// alpha < 0 selects 1e-10 times the largest eigenvalue of the normal matrix.
// Targets are full nodal vectors.
FitReport simultaneous_fit(const Dictionary& d, const VectorXc& target1, const VectorXc& target2, double alpha,
                           BulkTopology topology = BulkTopology::L2, int prefix = -1);
FitReport simultaneous_fit(const Dictionary& d, const FitMetrics& m, const VectorXc& target1,
                           const VectorXc& target2, double alpha, int prefix = -1);

// Relative weak residual of -Lap w + (Q + V) w = 0 for w = rho u,
// rho = d^{(1-2s)/2}, Q = Lap rho / rho, tested with the hats of vertices
// strictly inside `box`, relative to the same functional with absolute
// integrands.  Throws SubdomainTouchesBoundary.
double liouville_check(const Mesh& mesh, const VectorXc& u, const SubBox& box, const WeightSpec& ws,
                       const RealField& V);

}  // namespace degenlab
