#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "degenlab/assembly.hpp"
#include "degenlab/error.hpp"
#include "degenlab/fem.hpp"
#include "degenlab/mesh.hpp"
#include "degenlab/norms.hpp"
#include "degenlab/quadrature.hpp"

using namespace degenlab;

TEST(Mesh, GradedLayersShrinkGeometrically) {
    const Mesh m = build_graded_box({1.0, 2.0}, {4, 6}, 0.7);
    const auto h = m.layer_heights();
    ASSERT_EQ(h.size(), 6u);
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        sum += h[i];
        if (i) EXPECT_NEAR(h[i - 1] / h[i], 0.7, 1e-13);
    }
    EXPECT_NEAR(sum, 2.0, 1e-14);
    EXPECT_EQ(m.num_vertices(), 5 * 7);
    EXPECT_EQ(m.num_cells(), 24);
    EXPECT_EQ(m.count_tag(BoundaryTag::Sigma1), 4u);
    EXPECT_EQ(m.count_tag(BoundaryTag::Sigma2), 4u + 2u * 6u);
}

TEST(Mesh, RejectsBadInput) {
    EXPECT_THROW(build_graded_box({1.0, -1.0}, {2, 2}, 1.0), Error);
    EXPECT_THROW(build_graded_box({1.0, 1.0}, {0, 2}, 1.0), Error);
    Mesh m = build_graded_box({1.0, 1.0}, {2, 2}, 1.0);
    try {
        apply_named_tags(m, "nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownTag);
    }
}

TEST(Mesh, TopSigma2GroundsTheSides) {
    Mesh m = build_graded_box({1.0, 1.0, 1.0}, {2, 3, 2}, 1.0);
    apply_named_tags(m, "top-sigma2");
    EXPECT_EQ(m.count_tag(BoundaryTag::Sigma1), 6u);
    EXPECT_EQ(m.count_tag(BoundaryTag::Sigma2), 6u);
    EXPECT_EQ(m.count_tag(BoundaryTag::Rest), 2u * (3 * 2 + 2 * 2));
}

TEST(Quadrature, GaussJacobiIsExactForMonomials) {
    for (double beta : {-0.5, 0.0, 0.4}) {
        const Rule1D r = gauss_jacobi01(6, beta);
        for (int k = 0; k <= 11; ++k) {
            double q = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], k);
            EXPECT_NEAR(q, 1.0 / (k + beta + 1.0), 1e-13) << "beta " << beta << " k " << k;
        }
    }
}

TEST(Quadrature, WeightedMomentMatchesTanhSinh) {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double s : {0.5, 0.6, 0.75, 0.9})
        for (int m = 0; m <= 3; ++m)
            for (auto [a, b] : {std::pair{0.0, 0.1}, std::pair{0.2, 0.7}}) {
                const double ref = ts.integrate([&](double t) { return std::pow(t, 1.0 - 2.0 * s + m); }, a, b);
                EXPECT_NEAR(weighted_cell_moment(a, b, s, m), ref, 1e-12 * std::max(1.0, std::abs(ref)));
            }
}

TEST(Quadrature, BottomCellRuleAbsorbsTheWeight) {
    auto mesh = build_graded_box({1.0, 1.0}, {3, 4}, 0.5);
    const double s = 0.8;
    const WeightFunction wf(mesh, WeightSpec{s, WeightMode::Vertical});
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Point lo = mesh.cell_lower(c), hi = mesh.cell_upper(c);
        double q = 0.0;
        for (const auto& p : cell_rule(mesh, wf, c, RuleOrders{2, 8})) q += p.w * p.x[1] * p.x[1];
        const double ref = (hi[0] - lo[0]) * weighted_cell_moment(lo[1], hi[1], s, 2);
        // exact on the bottom layer; Gauss-Legendre on a smooth but non-polynomial weight above it
        EXPECT_NEAR(q, ref, (lo[1] == 0.0 ? 1e-13 : 1e-11) * std::abs(ref) + 1e-16) << "cell " << c;
    }
}

TEST(Fem, ShapeFunctionsPartitionUnity) {
    const Point lo{0.1, 0.2, 0.3}, hi{0.4, 0.9, 0.5};
    for (int dim : {2, 3}) {
        const Q1Eval e = q1_eval(dim, lo, hi, Point{0.17, 0.61, 0.44});
        double v = 0.0, g[3] = {0, 0, 0};
        for (int i = 0; i < e.n; ++i) {
            v += e.val[i];
            for (int a = 0; a < 3; ++a) g[a] += e.grad[i][a];
        }
        EXPECT_NEAR(v, 1.0, 1e-15);
        for (double x : g) EXPECT_NEAR(x, 0.0, 1e-13);
    }
}

TEST(Fem, InterpolationReproducesMultilinearFields) {
    const Mesh mesh = build_graded_box({1.0, 2.0, 1.5}, {3, 4, 5}, 0.7);
    auto f = [](const Point& x) { return cplx(1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[2], x[0] * x[1] * x[2]); };
    const VectorXc u = interpolate(mesh, f);
    for (const Point& x : {Point{0.33, 1.21, 0.07}, Point{0.9, 0.01, 1.4}}) {
        const FieldValue fv = evaluate_field(mesh, u, x);
        EXPECT_NEAR(std::abs(fv.value - f(x)), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(fv.grad[0] - cplx(2.0 + 0.5 * x[2], x[1] * x[2])), 0.0, 1e-13);
    }
}

TEST(Assembly, FormIsHermitianWithMagneticPotential) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1.0, 1.0}, {10, 10}, 0.7));
    Potentials p;
    p.V = gaussian_bump(2.0, {0.5, 0.5, 0.0}, 0.3);
    p.q = constant_field(0.7);
    p.A = curl_bump(1.0, {0.5, 0.5, 0.0}, 0.1);
    const SystemAssembly sa = assemble(mesh, WeightSpec{0.5, WeightMode::Vertical}, p, 0.0);
    EXPECT_LT(hermitian_defect(sa.matrix), 1e-14);
    p.A = {};
    const SystemAssembly sb = assemble(mesh, WeightSpec{0.75, WeightMode::Vertical}, p, 0.0);
    EXPECT_LT(hermitian_defect(sb.matrix), 1e-14);
    EXPECT_LT((sb.matrix - SparseC(sb.matrix.transpose())).norm(), 1e-14 * sb.matrix.norm());
}

TEST(Assembly, MagneticNeedsFlatWeight) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1.0, 1.0}, {4, 4}, 0.7));
    Potentials p;
    p.A = curl_bump(1.0, {0.5, 0.5, 0.0}, 0.1);
    try {
        assemble(mesh, WeightSpec{0.75, WeightMode::Vertical}, p, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MagneticWithDegenerateWeight);
    }
}

TEST(Assembly, ThreadedAssemblyAgrees) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1.0, 1.0, 1.0}, {5, 5, 5}, 0.7));
    Potentials p;
    p.V = gaussian_bump(2.0, {0.5, 0.5, 0.5}, 0.3);
    p.q = constant_field(0.7);
    AssemblyOptions one, two;
    two.threads = 2;
    const WeightSpec ws{0.75, WeightMode::Vertical};
    const SystemAssembly a = assemble(mesh, ws, p, 0.0, one), a2 = assemble(mesh, ws, p, 0.0, one);
    const SystemAssembly b = assemble(mesh, ws, p, 0.0, two);
    EXPECT_EQ((a.matrix - a2.matrix).norm(), 0.0);
    EXPECT_LT((a.matrix - b.matrix).norm(), 1e-12 * a.matrix.norm());
}

TEST(Norms, WeightedL2OfOneIsTheWeightIntegral) {
    const Mesh mesh = build_graded_box({2.0, 1.0}, {4, 6}, 0.7);
    const double s = 0.75;
    const WeightedNorms n = weighted_norms(mesh, WeightSpec{s, WeightMode::Vertical}, VectorXc::Ones(mesh.num_vertices()));
    // int_0^2 int_0^1 t^{1-2s} dt dx = 2 / (2 - 2s)
    EXPECT_NEAR(n.l2w, std::sqrt(2.0 / (2.0 - 2.0 * s)), 1e-13);
    EXPECT_NEAR(n.h1semiw, 0.0, 1e-14);
    EXPECT_NEAR(n.l2Sigma1, std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(n.l2Boundary, std::sqrt(6.0), 1e-14);
}

TEST(Weight, DistanceModeIsClampedInside) {
    const Mesh mesh = build_graded_box({1.0, 1.0}, {4, 4}, 1.0);
    const WeightFunction wf(mesh, WeightSpec{0.75, WeightMode::DistanceToBoundary});
    EXPECT_NEAR(wf.distance({0.01, 0.5, 0}), 0.01, 1e-12);
    EXPECT_LE(wf.distance({0.5, 0.5, 0}), 0.5);
    EXPECT_GT(wf.distance({0.5, 0.5, 0}), 0.2);
    EXPECT_THROW((WeightSpec{1.0, WeightMode::Vertical}.validate()), Error);
}
