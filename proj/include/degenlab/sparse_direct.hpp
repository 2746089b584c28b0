#pragma once

#include "degenlab/types.hpp"

namespace degenlab {

// Complex sparse LU (UMFPACK).  The factor keeps its own copy of the matrix,
// and solve() is const and safe to call from several threads at once.
class SparseDirect {
public:
    SparseDirect() = default;
    explicit SparseDirect(const SparseC& a) { compute(a); }
    ~SparseDirect();
    SparseDirect(const SparseDirect&) = delete;
    SparseDirect& operator=(const SparseDirect&) = delete;
    SparseDirect(SparseDirect&& o) noexcept;
    SparseDirect& operator=(SparseDirect&& o) noexcept;

    // Returns false when the matrix is structurally or numerically singular.
    bool compute(const SparseC& a);
    bool ok() const { return numeric_ != nullptr; }
    int rows() const { return static_cast<int>(a_.rows()); }
    VectorXc solve(const VectorXc& b) const;
    // Solves A^H x = b with the same factors.
    VectorXc solve_adjoint(const VectorXc& b) const;
    // Reciprocal condition estimate reported by the factorization.
    double rcond() const { return rcond_; }

private:
    void release();
    VectorXc solve_sys(int sys, const VectorXc& b) const;
    SparseC a_;
    void* numeric_ = nullptr;
    double rcond_ = 0.0;
};

}  // namespace degenlab
