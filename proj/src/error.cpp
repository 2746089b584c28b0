#include "degenlab/error.hpp"

namespace degenlab {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonPositiveExtent: return "NonPositiveExtent";
    case ErrorKind::TooFewCells: return "TooFewCells";
    case ErrorKind::MagneticWithDegenerateWeight: return "MagneticWithDegenerateWeight";
    case ErrorKind::UnknownTag: return "UnknownTag";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::ZeroIsEigenvalue: return "ZeroIsEigenvalue";
    case ErrorKind::SolverBreakdown: return "SolverBreakdown";
    case ErrorKind::EigsolverNoConvergence: return "EigsolverNoConvergence";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::UnresolvedOscillation: return "UnresolvedOscillation";
    case ErrorKind::CutoffViolation: return "CutoffViolation";
    case ErrorKind::SubdomainTouchesBoundary: return "SubdomainTouchesBoundary";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::BandTooNarrow: return "BandTooNarrow";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace degenlab
