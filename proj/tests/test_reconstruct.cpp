#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "degenlab/error.hpp"
#include "degenlab/reconstruct.hpp"

using namespace degenlab;

namespace {

// 2D oracle: adaptive Gauss-Kronrod in x and tanh-sinh in y, which copes
// with the integrable endpoint singularity of y^{1-2s}.
cplx oracle(const RealField& dV, const RealField& dq, double s, double L, double H, double k1, double k2) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    boost::math::quadrature::tanh_sinh<double> ts;
    auto bulk = [&](bool imag) {
        return GK::integrate(
            [&](double x) -> double {
                return ts.integrate(
                    [&](double y) -> double {
                        const double ph = k1 * x + k2 * std::pow(y, 2.0 * s);
                        return dV({x, y, 0.0}) * std::pow(y, 1.0 - 2.0 * s) * (imag ? std::sin(ph) : std::cos(ph));
                    },
                    0.0, H, 1e-14);
            },
            0.0, L, 15, 1e-14);
    };
    auto edge = [&](bool imag) {
        return GK::integrate([&](double x) { return dq({x, 0.0, 0.0}) * (imag ? std::sin(k1 * x) : std::cos(k1 * x)); },
                             0.0, L, 15, 1e-14);
    };
    return {bulk(false) + edge(false), bulk(true) + edge(true)};
}

}  // namespace

TEST(Reconstruct, PhaseOnlyPairingMatchesQuadratureOracle) {
    Potentials p1, p2;
    p1.V = gaussian_bump(1.0, {0.4, 0.3, 0.0}, 0.15);
    p1.q = cosine_mode(0.5, {2.0, 0.0, 0.0}, 0.3);
    for (double s : {0.5, 0.75})
        for (auto k : std::vector<std::vector<double>>{{0.0, 0.0}, {5.0, -3.0}, {-12.0, 20.0}}) {
            const cplx t = phase_only_pairing(p1, p2, s, {1.0, 1.0, 0.0}, 2, k);
            const cplx o = oracle(p1.V, p1.q, s, 1.0, 1.0, k[0], k[1]);
            EXPECT_LT(std::abs(t - o), 1e-10) << s << " " << k[0] << " " << k[1];
        }
}

TEST(Reconstruct, SamplesAreHermitian) {
    Potentials p1, p2;
    p1.V = gaussian_bump(1.0, {0.5, 0.5, 0.0}, 0.2);
    const FrequencyGrid g = default_grid(2, 15.0, 15.0, 17);
    const FrequencySamples fs = sample_phase_only(p1, p2, 0.5, {1.0, 1.0, 0.0}, 2, g);
    EXPECT_LT(fs.hermitian_defect(), 1e-12);
}

TEST(Reconstruct, GridIndexRoundTrip) {
    const FrequencyGrid g = default_grid(3, 10.0, 20.0, 9);
    EXPECT_EQ(g.size(), 9 * 9 * 9);
    for (int f = 0; f < g.size(); ++f) {
        const auto ijk = g.index(f);
        EXPECT_EQ(ijk[0] + 9 * (ijk[1] + 9 * ijk[2]), f);
    }
    EXPECT_DOUBLE_EQ(g.value(0, 0), -15.0);
    EXPECT_DOUBLE_EQ(g.value(2, 8), 30.0);
    EXPECT_DOUBLE_EQ(g.value(1, 4), 0.0);
}

TEST(Reconstruct, UnresolvableFrequencyIsRejected) {
    Potentials p1, p2;
    p1.V = constant_field(1.0);
    TransformQuadrature quad;
    quad.maxPanels = 4;
    try {
        phase_only_pairing(p1, p2, 0.5, {1.0, 1.0, 0.0}, 2, {200.0, 0.0}, quad);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnresolvedOscillation);
    }
}

TEST(Reconstruct, CoarseGridIsRejected) {
    Potentials p1, p2;
    p1.V = gaussian_bump(1.0, {0.5, 0.5, 0.0}, 0.05);
    const FrequencyGrid g = default_grid(2, 4.0, 4.0, 9);
    const FrequencySamples fs = sample_phase_only(p1, p2, 0.5, {1.0, 1.0, 0.0}, 2, g);
    ReconstructOptions o;
    o.bandwidth = 60.0;
    try {
        recover_V_fixed_q(fs, o);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
    }
}

TEST(Reconstruct, RecoversBandLimitedBumpIn2D) {
    Potentials p1, p2;
    const RealField dV = gaussian_bump(1.0, {0.5, 0.5, 0.0}, 0.15);
    p1.V = dV;
    const FrequencyGrid g = default_grid(2, 27.0, 27.0, 41);
    const FrequencySamples fs = sample_phase_only(p1, p2, 0.5, {1.0, 1.0, 0.0}, 2, g);
    const Reconstruction r = recover_V_fixed_q(fs);
    const ReconstructionError e = reconstruction_error(r, dV, RealField{});
    EXPECT_LT(e.V, 0.05);
    EXPECT_LT(r.imagResidueV, 1e-8);
}

TEST(Reconstruct, ZeroFrequencyOfConstantIsTheWeightedVolume) {
    Potentials p1, p2;
    p1.V = constant_field(1.0);
    for (double s : {0.5, 0.6, 0.75, 0.9}) {
        const cplx t = phase_only_pairing(p1, p2, s, {1.0, 1.0, 0.0}, 2, {0.0, 0.0});
        EXPECT_NEAR(std::abs(t - 1.0 / (2.0 - 2.0 * s)), 0.0, 1e-13) << s;
    }
}
