#include "degenlab/weight.hpp"

#include <algorithm>
#include <cmath>

#include "degenlab/error.hpp"

namespace degenlab {

void WeightSpec::validate() const {
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0,1)");
}

const char* to_string(WeightMode mode) {
    return mode == WeightMode::Vertical ? "Vertical" : "DistanceToBoundary";
}

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "Vertical" || name == "vertical") return WeightMode::Vertical;
    if (name == "DistanceToBoundary" || name == "distance") return WeightMode::DistanceToBoundary;
    throw Error(ErrorKind::ConfigInvalid, "weight.mode: unknown mode '" + name + "'");
}

WeightFunction::WeightFunction(const Mesh& mesh, const WeightSpec& spec) : spec_(spec), dim_(mesh.dim()) {
    spec_.validate();
    double inradius = 1e300;
    for (int a = 0; a < dim_; ++a) {
        extent_[a] = mesh.extent(a);
        inradius = std::min(inradius, 0.5 * extent_[a]);
    }
    clamp_ = spec.clamp > 0.0 ? spec.clamp : 0.5 * inradius;
}

double WeightFunction::distance(const Point& x) const {
    if (spec_.mode == WeightMode::Vertical) return x[dim_ - 1];
    double d = 1e300;
    for (int a = 0; a < dim_; ++a) d = std::min({d, x[a], extent_[a] - x[a]});
    // polynomial smooth minimum with the clamp; exact distance within clamp/2 of the boundary
    const double k = 0.5 * clamp_;
    const double h = std::max(k - std::abs(d - clamp_), 0.0) / k;
    return std::min(d, clamp_) - h * h * h * k / 6.0;
}

double WeightFunction::operator()(const Point& x) const {
    if (spec_.s == 0.5) return 1.0;
    return std::pow(distance(x), spec_.beta());
}

}  // namespace degenlab
