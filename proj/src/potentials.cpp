#include "degenlab/potentials.hpp"

#include <cmath>
#include <random>

namespace degenlab {

RealField constant_field(double c) {
    return [c](const Point&) { return c; };
}

RealField gaussian_bump(double amplitude, const Point& center, double width) {
    return [=](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        return amplitude * std::exp(-r2 / (width * width));
    };
}

RealField cosine_mode(double amplitude, const Point& k, double phase) {
    return [=](const Point& x) { return amplitude * std::cos(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase); };
}

RealField random_smooth(std::uint64_t seed, double amplitude, int modes, const Point& extents, int dim) {
    struct Term {
        std::array<int, 3> n;
        double c;
        std::array<double, 3> phase;
    };
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
    std::vector<Term> terms;
    for (int m = 0; m < modes; ++m) {
        Term t{};
        for (int a = 0; a < 3; ++a) {
            t.n[a] = a < dim ? static_cast<int>(rng() % 3) : 0;
            t.phase[a] = uni(rng);
        }
        t.c = normal(rng) / (1.0 + t.n[0] + t.n[1] + t.n[2]);
        terms.push_back(t);
    }
    return [=](const Point& x) {
        double v = 0.0;
        for (const auto& t : terms) {
            double p = t.c;
            for (int a = 0; a < dim; ++a) p *= std::cos(kPi * t.n[a] * x[a] / extents[a] + t.phase[a]);
            v += p;
        }
        return amplitude * v;
    };
}

VectorField curl_bump(double amplitude, const Point& center, double width) {
    return [=](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < 3; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        const double psi = amplitude * std::exp(-r2 / (width * width));
        const double c = -2.0 / (width * width);
        return Point{c * (x[1] - center[1]) * psi, -c * (x[0] - center[0]) * psi, 0.0};
    };
}

RealField sum_fields(RealField a, RealField b) {
    if (!a) return b;
    if (!b) return a;
    return [a, b](const Point& x) { return a(x) + b(x); };
}

}  // namespace degenlab
