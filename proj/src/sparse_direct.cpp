#include "degenlab/sparse_direct.hpp"

#include <umfpack.h>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

const double* raw(const SparseC& a) { return reinterpret_cast<const double*>(a.valuePtr()); }

}  // namespace

SparseDirect::~SparseDirect() { release(); }

SparseDirect::SparseDirect(SparseDirect&& o) noexcept
    : a_(std::move(o.a_)), numeric_(o.numeric_), rcond_(o.rcond_) {
    o.numeric_ = nullptr;
}

SparseDirect& SparseDirect::operator=(SparseDirect&& o) noexcept {
    if (this != &o) {
        release();
        a_ = std::move(o.a_);
        numeric_ = o.numeric_;
        rcond_ = o.rcond_;
        o.numeric_ = nullptr;
    }
    return *this;
}

void SparseDirect::release() {
    if (numeric_) umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
}

bool SparseDirect::compute(const SparseC& a) {
    release();
    if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, "sparse LU needs a square matrix");
    a_ = a;
    a_.makeCompressed();
    const int n = static_cast<int>(a_.rows());
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_zi_defaults(control);
    void* symbolic = nullptr;
    int status = umfpack_zi_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(), raw(a_), nullptr, &symbolic,
                                     control, info);
    if (status != UMFPACK_OK) {
        if (symbolic) umfpack_zi_free_symbolic(&symbolic);
        return false;
    }
    status = umfpack_zi_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), raw(a_), nullptr, symbolic, &numeric_,
                                control, info);
    umfpack_zi_free_symbolic(&symbolic);
    if (status != UMFPACK_OK) {
        release();
        return false;
    }
    rcond_ = info[UMFPACK_RCOND];
    return true;
}

VectorXc SparseDirect::solve(const VectorXc& b) const { return solve_sys(UMFPACK_A, b); }

VectorXc SparseDirect::solve_adjoint(const VectorXc& b) const { return solve_sys(UMFPACK_At, b); }

VectorXc SparseDirect::solve_sys(int sys, const VectorXc& b) const {
    if (!numeric_) throw Error(ErrorKind::SolverFailure, "sparse LU used before a successful factorization");
    if (b.size() != a_.rows()) throw Error(ErrorKind::InvalidArgument, "right-hand side has the wrong size");
    VectorXc x(b.size());
    double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
    umfpack_zi_defaults(control);
    const int status = umfpack_zi_solve(sys, a_.outerIndexPtr(), a_.innerIndexPtr(), raw(a_), nullptr,
                                        reinterpret_cast<double*>(x.data()), nullptr,
                                        reinterpret_cast<const double*>(b.data()), nullptr, numeric_, control, info);
    if (status != UMFPACK_OK) throw Error(ErrorKind::SolverFailure, "sparse triangular solve failed");
    return x;
}

}  // namespace degenlab
