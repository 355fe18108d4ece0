#include <gtest/gtest.h>

#include "matrange/verify.hpp"

using namespace matrange;

namespace {

void expect_consistent(const SuiteReport& r) {
    EXPECT_EQ(r.passes + static_cast<int>(r.failures.size()), r.trials);
}

}  // namespace

TEST(StarSuite, RandomPairAtTheBound) {
    SolverOptions opts;
    opts.seed = 2;
    const SuiteReport r = check_star_shaped(random_hermitian_tuple(2, 63, 2), 1, 1, 8, {0.25, 0.5, 0.75}, opts);
    expect_consistent(r);
    EXPECT_EQ(r.trials, 24);
    EXPECT_TRUE(r.threshold_met()) << r.passes << "/" << r.trials;
    EXPECT_TRUE(r.notes.empty());
}

TEST(StarSuite, PlantedIsExact) {
    const SuiteReport r = check_star_shaped_planted(2, 2, 2, 5, {0.0, 0.25, 0.5, 0.75, 1.0}, 3);
    expect_consistent(r);
    EXPECT_EQ(r.passes, 25);
}

TEST(StarSuite, BelowBoundIsNoted) {
    const SuiteReport r = check_star_shaped(random_hermitian_tuple(1, 6, 4), 1, 1, 4, {0.5});
    expect_consistent(r);
    ASSERT_FALSE(r.notes.empty());
}

TEST(BoundsSuite, EmptyTupleIsVacuous) {
    const SuiteReport r = check_nonempty_bounds(0, 2, 50);
    EXPECT_EQ(r.trials, 0);
    EXPECT_TRUE(r.threshold_met());
    ASSERT_EQ(r.notes.size(), 1u);
}

TEST(BoundsSuite, GeneralAndRefined) {
    EXPECT_EQ(nonempty_dimension(2, 2, NonemptyBound::General), 9);
    EXPECT_EQ(nonempty_dimension(1, 3, NonemptyBound::Refined), 5);
    EXPECT_EQ(nonempty_dimension(2, 3, NonemptyBound::Refined), 7);
    EXPECT_THROW(nonempty_dimension(3, 2, NonemptyBound::Refined), ValueError);
    const SuiteReport g = check_nonempty_bounds(2, 2, 20);
    expect_consistent(g);
    EXPECT_TRUE(g.threshold_met());
    // m = 1 is also checked against the interval oracle inside the suite
    const SuiteReport m1 = check_nonempty_bounds(1, 3, 20, {}, NonemptyBound::Refined);
    EXPECT_EQ(m1.passes, 20);
}

TEST(InclusionsSuite, RandomCorners) {
    const SuiteReport r = check_corner_inclusions(random_hermitian_tuple(2, 10, 5), 3, 1, 2, 10, 5);
    expect_consistent(r);
    EXPECT_EQ(r.trials, 50);
    EXPECT_TRUE(r.threshold_met());
    const SuiteReport q2 = check_corner_inclusions(random_hermitian_tuple(1, 12, 6), 3, 2, 1, 5, 3);
    EXPECT_TRUE(q2.threshold_met());
    EXPECT_THROW(check_corner_inclusions(random_hermitian_tuple(1, 6, 1), 2, 1, 2, 5, 1), ValueError);
}

TEST(InclusionsSuite, DiagonalIntervalOracle) {
    const SuiteReport r = check_corner_inclusions_interval(9, 3, 2, 200, 7);
    EXPECT_EQ(r.passes, 200);
}

TEST(ConvexitySuite, NumericalRangeMidpoints) {
    Rng rng(8);
    const HermitianTuple a = hermitian_embed({gaussian_matrix(6, 6, rng)});
    const PointCloud cloud = joint_numrange_sample(a, 40, 9, true);
    const SuiteReport r = check_convexity(cloud, a, 1, 1, random_pairs(cloud.size(), 20, 10));
    expect_consistent(r);
    EXPECT_TRUE(r.threshold_met());
}

TEST(ConvexitySuite, PauliExpectedFailure) {
    SolverOptions opts;
    opts.max_restarts = 200;
    const PointCloud cloud = pauli_antipodal_cloud(5, 11);
    for (std::size_t i = 0; i < cloud.size(); i += 2)
        EXPECT_LE((cloud.points[i] + cloud.points[i + 1]).norm(), 1e-12);  // antipodes on the Bloch sphere
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 5; ++i) pairs.emplace_back(2 * i, 2 * i + 1);
    const SuiteReport r = check_convexity(cloud, pauli_triple(), 1, 1, pairs, opts, {true, 0.5});
    EXPECT_TRUE(r.expected_failure);
    EXPECT_EQ(r.passes, 5);
}

TEST(PerturbationSuite, RandomAndZero) {
    const HermitianTuple a = random_hermitian_tuple(2, 10, 12);
    const SuiteReport r = check_perturbation_equivalence(a, 2, 1, 10, 2);
    expect_consistent(r);
    EXPECT_TRUE(r.threshold_met());
    const SuiteReport z = check_perturbation_equivalence(a, 2, 1, 3, 0);
    EXPECT_EQ(z.passes, 3);
}

TEST(PerturbationSuite, PlantedFirstCoordinate) {
    // F supported on e_1; the complement corner sees the untouched diagonal exactly
    const HermitianTuple d{HermitianMatrix::diagonal({9, 1, 2, 3, 4, 5}).matrix()};
    Matrix e1 = Matrix::Zero(6, 1);
    e1(0, 0) = 1.0;
    const CornerSpec corner = corner_avoiding(e1, 6);
    const HermitianTuple pert{Matrix(d[0] + 7.0 * e1 * e1.adjoint())};
    auto r = solve_free(corner_compress(d, corner), 2, 1);
    ASSERT_TRUE(accepted(r));
    EXPECT_LE(lift_certificate(pert, corner.basis.matrix(), std::get<Certificate>(r)).residual, 1e-8);
}

TEST(Suites, DeterministicAcrossThreads) {
    SolverOptions one;
    one.seed = 13;
    SolverOptions four = one;
    four.threads = 4;
    const HermitianTuple a = random_hermitian_tuple(2, 10, 14);
    const SuiteReport r1 = check_corner_inclusions(a, 3, 1, 1, 6, 2, one);
    const SuiteReport r4 = check_corner_inclusions(a, 3, 1, 1, 6, 2, four);
    EXPECT_EQ(r1.passes, r4.passes);
    ASSERT_EQ(r1.failures.size(), r4.failures.size());
    for (std::size_t i = 0; i < r1.failures.size(); ++i) EXPECT_EQ(r1.failures[i].seed, r4.failures[i].seed);
}
