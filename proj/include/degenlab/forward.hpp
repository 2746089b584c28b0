#pragma once

#include <memory>
#include <optional>

#include "degenlab/assembly.hpp"
#include "degenlab/sparse_direct.hpp"

namespace degenlab {

struct MixedData {
    VectorXc f2;             // values on assembly.sigma2Dofs; empty means zero
    ComplexField f1;         // Robin right-hand side on Sigma1
    ComplexField F0;         // bulk load: <F,v> = int w (F0 conj(v) + Ftilde . grad conj(v))
    ComplexVectorField Ftilde;
};

struct Solution {
    std::shared_ptr<const SystemAssembly> assembly;
    MixedData data;
    VectorXc u;
    double residual = 0.0;
    double aprioriRatio = 0.0;  // ||u||_{H1w} / (||F|| + ||f1|| + ||f2||)
};

struct SolverOptions {
    bool eigenGuard = true;
    double iterativeTol = 1e-10;
    int threads = 1;
};

struct EigenResult {
    double eigenvalue = 0.0;  // eigenvalue of the unshifted form nearest to lambdaShift
    int iterations = 0;
    double residual = 0.0;
};

// Factorization of the constrained operator, shareable across solves.
class ForwardSolver {
public:
    explicit ForwardSolver(std::shared_ptr<const SystemAssembly> assembly, const SolverOptions& opts = {});

    const SystemAssembly& assembly() const { return *sa_; }
    std::shared_ptr<const SystemAssembly> assembly_ptr() const { return sa_; }

    Solution solve(const MixedData& data) const;
    Solution poisson(const VectorXc& f2) const;
    // Solutions for every column of F (Sigma2 data), returned as full coefficient columns.
    MatrixXc poisson_columns(const MatrixXc& F, int threads = 1) const;

    // Solve K_FF x = b on free dofs.
    VectorXc solve_free(const VectorXc& b) const;
    const SparseC& K_FF() const { return KFF_; }
    const SparseC& K_FD() const { return KFD_; }
    const SparseC& M_FF() const { return MFF_; }

    // Eigenvalue of the unshifted constrained pencil nearest to lambdaShift.
    EigenResult nearest_eigenvalue() const;
    bool iterative() const { return useIterative_; }

    // Load vector <F,phi_i> + (f1,phi_i)_{Sigma1} over all dofs.
    VectorXc load_vector(const MixedData& data) const;

private:
    std::shared_ptr<const SystemAssembly> sa_;
    SolverOptions opts_;
    SparseC KFF_, KFD_, MFF_;
    SparseDirect lu_;
    bool useIterative_ = false;
};

std::shared_ptr<SystemAssembly> make_assembly(std::shared_ptr<const Mesh> mesh, const WeightSpec& ws,
                                              const Potentials& pots, double lambda,
                                              const AssemblyOptions& opts = {});

Solution solve_mixed(std::shared_ptr<const SystemAssembly> assembly, const MixedData& data,
                     const SolverOptions& opts = {});
Solution poisson(std::shared_ptr<const SystemAssembly> assembly, const VectorXc& f2, const SolverOptions& opts = {});
double nearest_eigenvalue(std::shared_ptr<const SystemAssembly> assembly);

VectorXc assemble_load(const SystemAssembly& sa, const MixedData& data);

// Weighted outward co-normal flux of u paired with every boundary hat,
// computed through the form: N_b = B(u, phi_b) - (q u, phi_b)_{Sigma1} - <F, phi_b>.
// Entries follow mesh.boundary_vertices().
VectorXc weighted_normal_derivative(const Solution& sol);
// Same duality with an arbitrary discrete extension e (full coefficient
// vector): returns int_{dOmega} (w d_nu u) conj(e).
cplx normal_pairing(const Solution& sol, const VectorXc& extension);

// Discrete weighted-harmonic extension of boundary values g (indexed like
// mesh.boundary_vertices()).
VectorXc extend_trace(const Mesh& mesh, const WeightSpec& ws, const VectorXc& g);

// Dirichlet-solve helper on a sparse Hermitian operator: unknowns outside
// `constrained` are solved for, constrained entries take `values`.
VectorXc constrained_solve(const SparseC& K, const std::vector<int>& constrained, const VectorXc& values,
                           const VectorXc& rhs);

}  // namespace degenlab
