#include <cmath>

#include <gtest/gtest.h>

#include "degenlab/carleman.hpp"
#include "degenlab/cgo.hpp"
#include "degenlab/error.hpp"

using namespace degenlab;

TEST(CGO, FrequencyInvariants) {
    for (double s : {0.5, 0.6, 0.75, 0.9})
        for (int dim : {2, 3})
            for (double tau : {1.0, 7.5, 40.0}) {
                // xi needs a two-dimensional orthogonal complement of k (horizontal for s > 1/2)
                if (s > 0.5 && dim == 2) continue;
                std::vector<double> k(dim, 0.0);
                if (dim == 3) {
                    k[0] = s > 0.5 ? 0.0 : 1.3;
                    k[2] = 0.7;
                }
                const CGOParams p = construct_xi(k, tau, s, dim);
                EXPECT_LT(p.xi_dot_xi(), 1e-14 * tau * tau) << s << " " << dim;
                EXPECT_LT(p.xi_dot_k(), 1e-14 * tau);
                EXPECT_NEAR(p.xi_norm(), std::sqrt(2.0) * tau, 1e-12 * tau);
                if (s > 0.5) EXPECT_EQ(p.xi[dim - 1], cplx(0.0));
            }
}

TEST(CGO, TwoDimensionalFractionalCaseIsRejected) {
    try {
        construct_xi({1.0, 0.0}, 2.0, 0.75, 2);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionTooSmall);
    }
}

TEST(CGO, SourceMatchesFiniteDifferences) {
    // f = -(div(w grad a) + w V a + 2 w xi.grad a), checked against central differences of a
    const double s = 0.75, h = 1e-4;
    auto mesh = build_graded_box({1, 1, 1}, {4, 4, 4}, 0.7);
    const CGOParams p = construct_xi({0.0, 0.0, 1.2}, 3.0, s, 3);
    const RealField V = gaussian_bump(1.0, {0.5, 0.5, 0.5}, 0.3), q = constant_field(0.4);
    const CGOSource src = cgo_source(p, V, q, mesh);
    const Point x{0.31, 0.62, 0.45};
    auto w = [&](double t) { return std::pow(t, 1.0 - 2.0 * s); };
    auto a = [&](Point y) { return cgo_phase(p, y); };
    cplx div = 0.0, xigrad = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
        Point xp = x, xm = x;
        xp[ax] += h;
        xm[ax] -= h;
        Point xph = x, xmh = x;
        xph[ax] += 0.5 * h;
        xmh[ax] -= 0.5 * h;
        const double wp = ax == 2 ? w(xph[2]) : w(x[2]), wm = ax == 2 ? w(xmh[2]) : w(x[2]);
        div += (wp * (a(xp) - a(x)) - wm * (a(x) - a(xm))) / (h * h);
        xigrad += p.xi[ax] * (a(xp) - a(xm)) / (2.0 * h);
    }
    const cplx f = -(div + w(x[2]) * V(x) * a(x) + 2.0 * w(x[2]) * xigrad);
    EXPECT_LT(std::abs(src.F0(x) * w(x[2]) - f), 1e-5 * std::abs(f));
    EXPECT_GT(src.fNorm, 0.0);
    EXPECT_GT(src.gNorm, 0.0);
}

TEST(CGO, ResolutionGuard) {
    auto mesh = build_graded_box({1, 1}, {8, 8}, 0.7);
    EXPECT_NO_THROW(check_resolution(mesh, construct_xi({0.0, 0.0}, 0.5, 0.5, 2)));
    try {
        check_resolution(mesh, construct_xi({0.0, 0.0}, 40.0, 0.5, 2));
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnresolvedOscillation);
    }
}

TEST(CGO, RemainderSatisfiesWeakEquation) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1, 1}, {16, 16}, 1.0));
    const CGOParams p = construct_xi({0.0, 0.0}, 2.0, 0.5, 2);
    const RealField V = constant_field(0.5), q = constant_field(0.3);
    for (RemainderBC bc : {RemainderBC::MinimalNorm, RemainderBC::NaturalSigma2, RemainderBC::ShiftedNatural}) {
        RemainderOptions o;
        o.bc = bc;
        const RemainderResult r = solve_remainder(p, V, q, mesh, o);
        EXPECT_LT(r.residual, 1e-8) << to_string(bc);
        EXPECT_GT(r.norms.l2w, 0.0);
    }
}

TEST(CGO, LogLogSlope) {
    const std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> y;
    for (double t : x) y.push_back(3.0 * std::pow(t, -0.75));
    EXPECT_NEAR(loglog_slope(x, y), -0.75, 1e-13);
    EXPECT_NEAR(upper_half_slope(x, y), -0.75, 1e-13);
    y.back() *= 4.0;  // upper half sees the kink
    EXPECT_GT(upper_half_slope(x, y), loglog_slope(x, y));
}

TEST(Carleman, TraceRatioOfConstant) {
    const Mesh mesh = build_graded_box({1, 1}, {16, 16}, 1.0);
    const VectorXc one = VectorXc::Ones(mesh.num_vertices());
    // boundary length 4, area 1: 2 / (10 * 1) = 0.2
    EXPECT_NEAR(trace_inequality_ratio(mesh, one, 10.0, 0.5, TraceMode::Unweighted), 0.2, 1e-12);
    try {
        trace_inequality_ratio(mesh, one, 0.5, 0.5, TraceMode::Unweighted);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

TEST(Carleman, CutoffFieldVanishesAwayFromSigma1) {
    const Mesh mesh = build_graded_box({1, 1, 1}, {6, 6, 6}, 0.7);
    for (unsigned seed : {1u, 2u, 3u}) {
        const CutoffTestField v(mesh, 0.75, seed);
        EXPECT_NO_THROW(check_cutoff(v, mesh));
        EXPECT_NEAR(v.value({0.0, 0.4, 0.3}), 0.0, 1e-14);
        EXPECT_NEAR(v.value({0.4, 0.3, 1.0}), 0.0, 1e-14);
    }
}

TEST(Carleman, CutoffFieldDerivativesMatchFiniteDifferences) {
    const Mesh mesh = build_graded_box({1, 1}, {6, 6}, 0.7);
    const double s = 0.75, h = 1e-4;
    const CutoffTestField v(mesh, s, 5);
    const Point x{0.37, 0.55, 0.0};
    const auto g = v.grad(x);
    for (int ax = 0; ax < 2; ++ax) {
        Point xp = x, xm = x;
        xp[ax] += h;
        xm[ax] -= h;
        EXPECT_NEAR(g[ax], (v.value(xp) - v.value(xm)) / (2 * h), 1e-6);
    }
    auto w = [&](double t) { return std::pow(t, 1.0 - 2.0 * s); };
    auto dv = [&](int ax, Point y) {
        Point yp = y, ym = y;
        yp[ax] += h;
        ym[ax] -= h;
        return (v.value(yp) - v.value(ym)) / (2 * h);
    };
    Point xp = x, xm = x;
    xp[0] += h;
    xm[0] -= h;
    Point yp = x, ym = x;
    yp[1] += h;
    ym[1] -= h;
    const double div = (dv(0, xp) - dv(0, xm)) / (2 * h) + (w(yp[1]) * dv(1, yp) - w(ym[1]) * dv(1, ym)) / (2 * h * w(x[1]));
    EXPECT_NEAR(v.div_w_grad_over_w(x), div, 1e-4 * (1.0 + std::abs(div)));
}

TEST(Carleman, ZeroFieldSentinel) {
    const CarlemanResult r = carleman_ratio_zero();
    EXPECT_TRUE(r.zero);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
}

TEST(Carleman, RatioStaysBoundedInTau) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1, 1}, {32, 32}, 1.0));
    const CarlemanSweep sw = carleman_sweep(0.5, {2.0, 4.0, 8.0}, {1u, 2u}, constant_field(0.5), constant_field(0.1), mesh);
    EXPECT_FALSE(sw.skipped);
    EXPECT_LE(sw.maxSlope, 0.1);
    const CarlemanSweep skip = carleman_sweep(0.5, {2.0, 3.0, 4.0}, {1u}, constant_field(0.5), constant_field(3.0), mesh);
    EXPECT_TRUE(skip.skipped);
    EXPECT_FALSE(skip.warning.empty());
}
