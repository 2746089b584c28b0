#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "degenlab/forward.hpp"

namespace degenlab {

enum class BasisKind { NodalHat, SmoothBump };

const char* to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& name);

// Trace basis on Sigma2.  Column j of `values` holds the nodal values of f_j
// on assembly.sigma2Dofs; the discrete extension E f_j is that nodal vector
// padded with zeros.
struct TraceBasis {
    BasisKind kind = BasisKind::NodalHat;
    int modes = 0;  // SmoothBump: cosine modes per axis
    MatrixXc values;
    std::string descriptor() const;
};

// NodalHat: identity.  SmoothBump: (x_d/H)^2 prod_a cos(m_a pi x_a / L_a),
// 0 <= m_a < modes, restricted to Sigma2; the factor (x_d/H)^2 makes every
// function vanish where Sigma2 meets Sigma1.
TraceBasis make_basis(const SystemAssembly& sa, BasisKind kind, int modes = 4);

struct DtNMatrix {
    MatrixXc entries;  // entries(i,j) = B(u_{f_j}, E f_i)
    std::string basis;
    std::vector<int> sigma2Dofs;
    std::string potentialsDigest;
    bool fromCache = false;
};

struct DtNOptions {
    int threads = 1;
    bool useCache = true;
    std::string cacheDir;  // empty: $DEGENLAB_CACHE, then ~/.cache/degenlab
    // Compare with the dense Schur complement when the free system has at
    // most this many dofs (0 disables).
    int oracleMaxFree = 0;
    double oracleTol = 1e-10;
    SolverOptions solver;
};

// SHA-256 over the mesh coordinates and tags, the weight spec, the assembled
// operator, the trace basis values and the Sigma2 dof list.
std::string dtn_digest(const SystemAssembly& sa, const TraceBasis& basis);

DtNMatrix compute_dtn(std::shared_ptr<const SystemAssembly> sa, const TraceBasis& basis,
                      const DtNOptions& opts = {});

// Dense Schur complement K22 - K2F K_FF^{-1} K_F2 over sigma2Dofs.
MatrixXc schur_complement_oracle(const SystemAssembly& sa);

// ||L - L^T|| / ||L|| (plain transpose, bilinear pairing).
double symmetry_defect(const MatrixXc& L);
// ||L - L^H|| / ||L|| (sesquilinear pairing).
double hermitian_symmetry_defect(const MatrixXc& L);

// <(Lambda_1 - Lambda_2) f1, f2> = B1(P1 f1, E f2) - B2(P2 f1, E f2) for
// Sigma2 data f1, f2 (values on sigma2Dofs).  Both solvers must share the mesh.
cplx dtn_difference_pairing(const ForwardSolver& s1, const ForwardSolver& s2, const VectorXc& f1,
                            const VectorXc& f2);

struct AlessandriniResult {
    cplx lhs = 0.0, rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs| / (|lhs| + |rhs|), or |lhs - rhs| when both vanish
    double absolute = 0.0;
};

// <(Lambda_1 - Lambda_2) f1, f2> against
//   int w (V1 - V2 + |A1|^2 - |A2|^2) u1 conj(u2)
//   + i int w (A1 - A2) . (u1 grad conj(u2) - conj(u2) grad u1)
//   + int_{Sigma1} (q1 - q2) u1 conj(u2),
// u_k solving with potentials k and Sigma2 data f_k.  The right side is
// integrated with high-order quadrature and the exact potentials.
AlessandriniResult alessandrini_residual(std::shared_ptr<const Mesh> mesh, const WeightSpec& ws,
                                         const Potentials& p1, const Potentials& p2, const ComplexField& f1,
                                         const ComplexField& f2, const AssemblyOptions& aopts = {},
                                         const SolverOptions& sopts = {});

}  // namespace degenlab
