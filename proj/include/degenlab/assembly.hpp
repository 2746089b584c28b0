#pragma once

#include <memory>
#include <vector>

#include "degenlab/fem.hpp"
#include "degenlab/mesh.hpp"
#include "degenlab/potentials.hpp"
#include "degenlab/weight.hpp"

namespace degenlab {

struct AssemblyOptions {
    RuleOrders orders{2, 8};
    int threads = 1;
    // Optional cell mask; cells with mask false contribute nothing.
    std::vector<bool> cellMask;
};

// Discrete form B(u,v) - lambda (u,v)_w on Q1 nodal coefficients, stored as
// K(i,j) = B(phi_j, phi_i), so that B(u,v) = v^H K u.
struct SystemAssembly {
    std::shared_ptr<const Mesh> mesh;
    WeightSpec weightSpec;
    Potentials potentials;
    double lambdaShift = 0.0;
    AssemblyOptions options;

    SparseC matrix;  // full unconstrained operator, including -lambda * mass
    SparseC mass;    // weighted mass
    SparseC robin;   // Sigma1 q-term

    std::vector<int> sigma1Dofs;
    std::vector<int> sigma2Dofs;     // Dirichlet dofs carrying data (Sigma2 minus Rest)
    std::vector<int> restDofs;       // grounded dofs
    std::vector<int> dirichletDofs;  // sigma2Dofs + restDofs, sorted
    std::vector<int> freeDofs;
    std::vector<int> freeIndex;    // vertex -> position in freeDofs or -1
    std::vector<int> sigma2Index;  // vertex -> position in sigma2Dofs or -1

    const Mesh& mesh_ref() const { return *mesh; }
    int num_dofs() const { return static_cast<int>(matrix.rows()); }
};

SystemAssembly assemble(std::shared_ptr<const Mesh> mesh, const WeightSpec& ws, const Potentials& pots,
                        double lambda, const AssemblyOptions& opts = {});

// ||K - K^H||_F / ||K||_F
double hermitian_defect(const SparseC& K);

// Dense restriction of a sparse matrix to rows/cols index lists.
MatrixXc dense_block(const SparseC& K, const std::vector<int>& rows, const std::vector<int>& cols);
SparseC sparse_block(const SparseC& K, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace degenlab
