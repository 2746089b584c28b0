#pragma once

#include <cstdint>
#include <vector>

#include "degenlab/types.hpp"

namespace degenlab {

// Empty std::function members mean "identically zero".
struct Potentials {
    RealField V;
    RealField q;
    VectorField A;

    bool has_V() const { return static_cast<bool>(V); }
    bool has_q() const { return static_cast<bool>(q); }
    bool has_A() const { return static_cast<bool>(A); }
    double V_at(const Point& x) const { return V ? V(x) : 0.0; }
    double q_at(const Point& x) const { return q ? q(x) : 0.0; }
    Point A_at(const Point& x) const { return A ? A(x) : Point{0, 0, 0}; }
};

// Analytic field families.
RealField constant_field(double c);
RealField gaussian_bump(double amplitude, const Point& center, double width);
RealField cosine_mode(double amplitude, const Point& wavevector, double phase);
// Sum of low-frequency cosine products with seeded amplitudes; extents fix
// the fundamental frequencies.
RealField random_smooth(std::uint64_t seed, double amplitude, int modes, const Point& extents, int dim);
// Divergence-free field (d_2 psi, -d_1 psi, 0) with psi a Gaussian bump; it
// vanishes to machine precision near the boundary when the bump is interior.
VectorField curl_bump(double amplitude, const Point& center, double width);
RealField sum_fields(RealField a, RealField b);

}  // namespace degenlab
