#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "degenlab/error.hpp"
#include "degenlab/forward.hpp"
#include "degenlab/norms.hpp"

using namespace degenlab;

namespace {

std::shared_ptr<const Mesh> square(int n, double ratio = 1.0) {
    return std::make_shared<const Mesh>(build_graded_box({1.0, 1.0}, {n, n}, ratio));
}

// u* = cos(pi x)(1 + y^{2s}/(2s)) with w d_y u* = cos(pi x)
double manufactured_error(int n, double s) {
    const double V = 1.0, q = 0.5, c = 1.0 / (2.0 * s);
    ExactField ex;
    ex.value = [=](const Point& x) { return cplx(std::cos(kPi * x[0]) * (1.0 + c * std::pow(x[1], 2.0 * s))); };
    ex.grad = [=](const Point& x) {
        return std::array<cplx, 3>{-kPi * std::sin(kPi * x[0]) * (1.0 + c * std::pow(x[1], 2.0 * s)),
                                   std::cos(kPi * x[0]) * std::pow(x[1], 2.0 * s - 1.0), 0.0};
    };
    auto mesh = square(n);
    Potentials p;
    p.V = constant_field(V);
    p.q = constant_field(q);
    auto sa = make_assembly(mesh, WeightSpec{s, WeightMode::Vertical}, p, 0.0);
    MixedData d;
    d.F0 = [=](const Point& x) { return (kPi * kPi + V) * ex.value(x); };
    d.f1 = [=](const Point& x) { return -std::cos(kPi * x[0]) + q * ex.value(x); };
    d.f2.resize(static_cast<int>(sa->sigma2Dofs.size()));
    for (std::size_t i = 0; i < sa->sigma2Dofs.size(); ++i)
        d.f2(static_cast<int>(i)) = ex.value(mesh->vertex(sa->sigma2Dofs[i]));
    return error_norms(*mesh, sa->weightSpec, solve_mixed(sa, d).u, ex).h1w;
}

}  // namespace

TEST(Forward, ConstantDirichletDataGivesConstantSolution) {
    for (double s : {0.5, 0.75}) {
        auto sa = make_assembly(square(12, 0.7), WeightSpec{s, WeightMode::Vertical}, Potentials{}, 0.0);
        const Solution sol = poisson(sa, VectorXc::Ones(static_cast<int>(sa->sigma2Dofs.size())));
        EXPECT_LT((sol.u - VectorXc::Ones(sol.u.size())).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT(weighted_normal_derivative(sol).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Forward, ManufacturedSolutionConverges) {
    for (double s : {0.5, 0.75}) {
        const double e1 = manufactured_error(8, s), e2 = manufactured_error(16, s), e3 = manufactured_error(32, s);
        EXPECT_GE(std::log2(e1 / e2), 0.9);
        EXPECT_GE(std::log2(e2 / e3), 0.9);
    }
    // frozen from a reference run (uniform 16x16, Q1)
    EXPECT_NEAR(manufactured_error(16, 0.5), 0.192266, 2e-6);
    EXPECT_NEAR(manufactured_error(16, 0.75), 0.213939, 2e-6);
}

TEST(Forward, ExtensionReproducesHorizontalAffineData) {
    const Mesh mesh = build_graded_box({1.0, 1.0}, {8, 8}, 0.7);
    const auto bv = mesh.boundary_vertices();
    VectorXc g(static_cast<int>(bv.size()));
    for (std::size_t i = 0; i < bv.size(); ++i) g(static_cast<int>(i)) = mesh.vertex(bv[i])[0];
    const VectorXc e = extend_trace(mesh, WeightSpec{0.75, WeightMode::Vertical}, g);
    for (int v = 0; v < mesh.num_vertices(); ++v) EXPECT_NEAR(std::abs(e(v) - mesh.vertex(v)[0]), 0.0, 1e-10);
}

TEST(Forward, EigenvalueMatchesDenseOracle) {
    for (double s : {0.5, 0.75}) {
        Potentials p;
        p.V = constant_field(0.7);
        p.q = constant_field(0.4);
        auto sa = make_assembly(square(6), WeightSpec{s, WeightMode::Vertical}, p, 0.0);
        const ForwardSolver fs(sa, SolverOptions{false});
        const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXc> ges(MatrixXc(fs.K_FF()), MatrixXc(fs.M_FF()),
                                                                      Eigen::EigenvaluesOnly);
        double dense = ges.eigenvalues()(0);
        for (int i = 0; i < ges.eigenvalues().size(); ++i)
            if (std::abs(ges.eigenvalues()(i)) < std::abs(dense)) dense = ges.eigenvalues()(i);
        EXPECT_NEAR(nearest_eigenvalue(sa), dense, 1e-8 * std::abs(dense));
    }
}

TEST(Forward, GuardRejectsShiftAtAnEigenvalue) {
    auto mesh = square(8);
    auto sa = make_assembly(mesh, WeightSpec{0.75, WeightMode::Vertical}, Potentials{}, 0.0);
    const double lam = nearest_eigenvalue(sa);
    try {
        ForwardSolver bad(make_assembly(mesh, WeightSpec{0.75, WeightMode::Vertical}, Potentials{}, lam));
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroIsEigenvalue);
    }
    EXPECT_NO_THROW(ForwardSolver(make_assembly(mesh, WeightSpec{0.75, WeightMode::Vertical}, Potentials{}, 0.5 * lam)));
}

TEST(Forward, DirichletSquareFirstEigenvalue) {
    Mesh m = build_graded_box({1.0, 1.0}, {32, 32}, 1.0);
    apply_named_tags(m, "all-sigma2");
    auto sa = make_assembly(std::make_shared<const Mesh>(std::move(m)), WeightSpec{}, Potentials{}, 0.0);
    EXPECT_NEAR(nearest_eigenvalue(sa), 2.0 * kPi * kPi, 2e-3 * 2.0 * kPi * kPi);
}

TEST(Forward, SolveIsDeterministicAndThreadInvariant) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1.0, 1.0, 1.0}, {6, 6, 6}, 0.7));
    Potentials p;
    p.V = gaussian_bump(1.0, {0.5, 0.5, 0.5}, 0.3);
    p.q = constant_field(0.3);
    MixedData d;
    d.F0 = [](const Point& x) { return cplx(x[0], 1.0); };
    AssemblyOptions two;
    two.threads = 2;
    auto sa = make_assembly(mesh, WeightSpec{0.75, WeightMode::Vertical}, p, 0.0);
    auto sb = make_assembly(mesh, WeightSpec{0.75, WeightMode::Vertical}, p, 0.0, two);
    const VectorXc u1 = solve_mixed(sa, d).u, u2 = solve_mixed(sa, d).u, u3 = solve_mixed(sb, d).u;
    EXPECT_EQ((u1 - u2).norm(), 0.0);
    EXPECT_LT((u1 - u3).norm(), 1e-12 * u1.norm());
}

TEST(Forward, AprioriRatioIsBounded) {
    auto sa = make_assembly(square(16, 0.7), WeightSpec{0.75, WeightMode::Vertical}, Potentials{}, 0.0);
    double worst = 0.0;
    for (double k : {1.0, 4.0, 16.0}) {
        MixedData d;
        d.F0 = [k](const Point& x) { return cplx(std::cos(k * x[0]) * std::sin(k * x[1])); };
        d.f1 = [k](const Point& x) { return cplx(std::cos(k * x[0])); };
        worst = std::max(worst, solve_mixed(sa, d).aprioriRatio);
    }
    EXPECT_LT(worst, 10.0);
    EXPECT_GT(worst, 0.0);
}
