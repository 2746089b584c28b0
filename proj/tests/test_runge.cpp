#include <random>

#include <gtest/gtest.h>

#include "degenlab/error.hpp"
#include "degenlab/runge.hpp"

using namespace degenlab;

namespace {

std::shared_ptr<SystemAssembly> setup(int n, double s) {
    auto mesh = std::make_shared<const Mesh>(build_graded_box({1, 1}, {n, n}, 0.7));
    Potentials p;
    p.V = constant_field(0.5);
    p.q = constant_field(0.3);
    return make_assembly(mesh, WeightSpec{s, WeightMode::Vertical}, p, 0.0);
}

}  // namespace

TEST(Runge, DictionaryPrefixesAreNested) {
    auto sa = setup(12, 0.75);
    for (DictionaryFamily f : {DictionaryFamily::Hats, DictionaryFamily::Bumps, DictionaryFamily::RandomSmooth}) {
        const MatrixXc small = dictionary_inputs(*sa, 8, f), big = dictionary_inputs(*sa, 20, f);
        EXPECT_EQ((big.leftCols(8) - small).norm(), 0.0) << to_string(f);
    }
}

TEST(Runge, SubBoxMustStayInterior) {
    const Mesh mesh = build_graded_box({1, 1}, {16, 16}, 0.7);
    const SubBox b = centered_subbox(mesh, 0.25);
    EXPECT_FALSE(b.touches_domain_boundary(mesh));
    EXPECT_THROW(centered_subbox(mesh, 0.95), Error);
    try {
        centered_subbox(mesh, 0.95);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SubdomainTouchesBoundary);
    }
}

TEST(Runge, FitReproducesTargetsInTheSpan) {
    auto sa = setup(12, 0.5);
    const SubBox box = centered_subbox(*sa->mesh, 0.25);
    const Dictionary d = build_dictionary(sa, 16, DictionaryFamily::Hats, box);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    VectorXc c(d.size());
    for (int i = 0; i < c.size(); ++i) c(i) = cplx(g(rng), g(rng));
    const VectorXc t = d.solutions * c;
    const FitReport r = simultaneous_fit(d, t, t, 0.0);
    EXPECT_LT(r.combinedError, 1e-10);
    EXPECT_LT(dictionary_interior_residual(d), 1e-10);
}

TEST(Runge, ErrorIsMonotoneInDictionarySize) {
    auto sa = setup(16, 0.75);
    const SubBox box = centered_subbox(*sa->mesh, 0.25);
    const Dictionary d = build_dictionary(sa, 32, DictionaryFamily::Hats, box);
    const FitMetrics m = fit_metrics(d, BulkTopology::L2);
    const VectorXc t1 = VectorXc::Ones(sa->num_dofs());
    const BulkTarget t2 = bulk_target(*sa, box, 3);
    double prev = 1e300;
    for (int N : {4, 8, 16, 32}) {
        const FitReport r = simultaneous_fit(d, m, t1, t2.u, 0.0, N);
        EXPECT_LE(r.combinedError, prev * (1.0 + 1e-9));
        prev = r.combinedError;
    }
    EXPECT_LT(prev, 1.0);
}

TEST(Runge, LiouvilleTransformIsExactForTrivialWeight) {
    auto sa = setup(16, 0.5);
    const SubBox box = centered_subbox(*sa->mesh, 0.25);
    const BulkTarget t = bulk_target(*sa, box, 2);
    const double r = liouville_check(*sa->mesh, t.u, box, sa->weightSpec, sa->potentials.V);
    EXPECT_LT(r, 1e-10);
}
