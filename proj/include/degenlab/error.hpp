#pragma once

#include <stdexcept>
#include <string>

namespace degenlab {

enum class ErrorKind {
    NonPositiveExtent,
    TooFewCells,
    MagneticWithDegenerateWeight,
    UnknownTag,
    SolverFailure,
    ZeroIsEigenvalue,
    SolverBreakdown,
    EigsolverNoConvergence,
    DimensionTooSmall,
    UnresolvedOscillation,
    CutoffViolation,
    SubdomainTouchesBoundary,
    GridTooCoarse,
    BandTooNarrow,
    ConfigInvalid,
    NearSingular,
    IllConditioned,
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace degenlab
