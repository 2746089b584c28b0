#pragma once

#include "degenlab/mesh.hpp"
#include "degenlab/types.hpp"

namespace degenlab {

enum class WeightMode { Vertical, DistanceToBoundary };

struct WeightSpec {
    double s = 0.5;
    WeightMode mode = WeightMode::Vertical;
    // Interior clamp for the distance function; <= 0 selects inradius/2.
    double clamp = 0.0;

    double beta() const { return 1.0 - 2.0 * s; }
    bool trivial() const { return s == 0.5; }
    void validate() const;
};

const char* to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);

// Distance-like function entering the weight: x_d (Vertical) or the smoothly
// clamped box distance (DistanceToBoundary).
class WeightFunction {
public:
    WeightFunction(const Mesh& mesh, const WeightSpec& spec);

    double distance(const Point& x) const;
    double operator()(const Point& x) const;  // distance^(1-2s)
    const WeightSpec& spec() const { return spec_; }
    double clamp() const { return clamp_; }

private:
    WeightSpec spec_;
    int dim_;
    Point extent_{0, 0, 0};
    double clamp_;
};

}  // namespace degenlab
