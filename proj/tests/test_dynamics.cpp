#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace replicator;
using namespace replicator::testing;

TEST(Fitness, HandEvaluated)
{
    const auto f = fitness(build(bsoe(0.5)), SimplexState::uniform(3));
    EXPECT_NEAR(f(0), 0.5, 1e-15);
    EXPECT_NEAR(f(1), 0.5, 1e-15);
    EXPECT_NEAR(f(2), 2.0 / 3.0, 1e-15);

    const auto g = fitness(build(bso()), SimplexState{1.0, 0.0});
    EXPECT_EQ(g(0), 1.0);
    EXPECT_EQ(g(1), 0.0);
}

TEST(Fitness, UniformStateGivesRowMeans)
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const auto a = random_matrix(rng, 2 + k % 4);
        const auto f = fitness(a, SimplexState::uniform(a.size()));
        EXPECT_LT(max_abs(f - a.entries().rowwise().mean()), 1e-14);
    }
}

TEST(Fitness, DimensionMismatch)
{
    try {
        fitness(build(bso()), SimplexState::uniform(3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
    EXPECT_THROW(average_fitness(build(bsoe(0.2)), vec({0.5, 0.5})), Error);
    EXPECT_THROW(replicator_field(build(bsoe(0.2)), vec({0.5, 0.5})), Error);
}

TEST(AverageFitness, HandEvaluated)
{
    EXPECT_NEAR(average_fitness(build(bso()), SimplexState{0.5, 0.5}), 0.5, 1e-15);
    EXPECT_NEAR(average_fitness(build(bdo()), SimplexState{0.5, 0.5}), 0.5, 1e-15);
    const auto a = build(bdoep(0.3, 0.6));
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(average_fitness(a, SimplexState::vertex(3, i)), a(i, i));
}

TEST(ReplicatorField, TwoOpinionReducedFlows)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), d = 0.01 + 0.98 * u(rng);
        const auto s = vec({x, 1 - x});
        EXPECT_NEAR(replicator_field(build(bso()), s)(0), x * (1 - x) * (2 * x - 1), 1e-12);
        EXPECT_NEAR(replicator_field(build(bdo_pref(d)), s)(0), x * (1 - x) * (1 + d - 2 * x), 1e-12);
    }
}

TEST(ReplicatorField, VanishesAtVertices)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        const auto a = random_matrix(rng, 2 + k % 4);
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_EQ(max_abs(replicator_field(a, SimplexState::vertex(a.size(), i))), 0.0);
    }
}

TEST(ReplicatorField, MatchesTermByTermEvaluation)
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        const auto a = random_matrix(rng, 2 + k % 4);
        const auto x = random_state(rng, a.size());
        EXPECT_LT(max_abs(replicator_field(a, x) - naive_field(a, x)), 1e-13);
    }
}

// Invariants over random games and states.
TEST(ReplicatorField, Tangency)
{
    std::mt19937_64 rng(19);
    for (int k = 0; k < 1000; ++k) {
        const auto a = random_matrix(rng, 2 + k % 4);
        const auto x = random_state(rng, a.size());
        EXPECT_LT(std::abs(replicator_field(a, x).sum()), 1e-12);
    }
}

TEST(ReplicatorField, UniformPayoffsAreStationary)
{
    std::mt19937_64 rng(23);
    std::vector<OpinionLabel> labels{OpinionLabel("A"), OpinionLabel("B"), OpinionLabel("C")};
    const PayoffMatrix a(labels, Matrix::Constant(3, 3, 0.7));
    for (int k = 0; k < 100; ++k)
        EXPECT_LT(max_abs(replicator_field(a, random_state(rng, 3))), 1e-15);
}

TEST(ReplicatorField, ColumnShiftInvariance)
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const auto a = random_matrix(rng, 2 + k % 4);
        const auto x = random_state(rng, a.size());
        Matrix m = a.entries();
        m.col(static_cast<Eigen::Index>(k % a.size())).array() += shift(rng);
        const PayoffMatrix b(a.labels(), m);
        EXPECT_LT(max_abs(replicator_field(a, x) - replicator_field(b, x)), 1e-12);
    }
}

TEST(ReplicatorField, TwoStrategyReduction)
{
    std::mt19937_64 rng(31);
    for (int k = 0; k < 500; ++k) {
        const auto a = random_matrix(rng, 2);
        const auto x = random_state(rng, 2);
        const auto f = fitness(a, x);
        EXPECT_NEAR(replicator_field(a, x)(0), x(0) * (1 - x(0)) * (f(0) - f(1)), 1e-12);
    }
}

TEST(Integrate, BsoMajorityWins)
{
    const auto traj = integrate(build(bso()), SimplexState{0.6, 0.4}, 0.01, 100.0);
    EXPECT_LT(max_abs(traj.terminal_state().values() - vec({1, 0})), 1e-6);
    EXPECT_DOUBLE_EQ(traj.times.back(), 100.0);
}

TEST(Integrate, ExactFixedPointStays)
{
    const auto traj = integrate(build(bso()), SimplexState{0.5, 0.5}, 0.01, 50.0);
    EXPECT_EQ(traj.terminal_state().values(), vec({0.5, 0.5}));
    EXPECT_TRUE(traj.converged);
}

// The BDOE attractor (1/2, 1/2, 0) has a zero on-simplex eigenvalue; near it
// x_E' = -x_E^2 / 2 + O(x_E^3), so x_E decays like 2 / t.
TEST(Integrate, BdoeEquivocatorsDieOutAlgebraically)
{
    const auto a = build(bdoe(0.4));
    const SimplexState x0{0.2, 0.3, 0.5};
    const auto t500 = integrate(a, x0, 0.01, 500.0).terminal_state();
    EXPECT_GT(t500[2], 1e-3);
    EXPECT_LT(t500[2], 1e-2);
    EXPECT_LT(std::abs(t500[0] - t500[1]), 1e-2);
    for (double t : {2000.0, 10000.0}) {
        const auto x = integrate(a, x0, 0.01, t).terminal_state();
        EXPECT_GT(t * x[2], 1.8) << t;
        EXPECT_LT(t * x[2], 2.4) << t;
    }
    const auto far = integrate(a, x0, 0.01, 5e4).terminal_state();
    EXPECT_LT(max_abs(far.values() - vec({0.5, 0.5, 0.0})), 1e-4);
}

TEST(Integrate, FourthOrderConvergence)
{
    const auto a = build(bsoe(0.3));
    const SimplexState x0{0.3, 0.3, 0.4};
    const Vector ref = integrate(a, x0, 0.0125 / 16, 5.0).terminal_state().values();
    const double e1 = max_abs(integrate(a, x0, 0.2, 5.0).terminal_state().values() - ref);
    const double e2 = max_abs(integrate(a, x0, 0.1, 5.0).terminal_state().values() - ref);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, SimplexInvariantAndSampling)
{
    std::mt19937_64 rng(37);
    for (int k = 0; k < 10; ++k) {
        const auto a = random_matrix(rng, 3 + k % 2);
        const SimplexState x0(random_state(rng, a.size()));
        const auto traj = integrate(a, x0, 0.01, 300.0);
        EXPECT_LE(traj.times.size(), 10000u);
        EXPECT_EQ(traj.times.size(), traj.states.size());
        for (std::size_t i = 1; i < traj.times.size(); ++i)
            ASSERT_LT(traj.times[i - 1], traj.times[i]);
        for (const auto& s : traj.states) {
            ASSERT_LE(std::abs(s.values().sum() - 1.0), 1e-9);
            ASSERT_GE(s.values().minCoeff(), 0.0);
        }
    }
}

TEST(Integrate, ShortRunsKeepEveryStep)
{
    const auto traj = integrate(build(bso()), SimplexState{0.7, 0.3}, 0.1, 1.0);
    ASSERT_EQ(traj.times.size(), 11u);
    EXPECT_DOUBLE_EQ(traj.times[3], 0.30000000000000004);
}

TEST(Integrate, ArgumentErrors)
{
    const auto a = build(bso());
    EXPECT_THROW(integrate(a, SimplexState{0.5, 0.5}, 0.0, 1.0), Error);
    EXPECT_THROW(integrate(a, SimplexState{0.5, 0.5}, 0.1, -1.0), Error);
    EXPECT_THROW(integrate(a, SimplexState::uniform(3), 0.1, 1.0), Error);
}

TEST(Integrate, NonFiniteState)
{
    std::vector<OpinionLabel> labels{OpinionLabel("A"), OpinionLabel("B")};
    Matrix m(2, 2);
    m << 1e308, -1e308, -1e308, 1e308;
    const PayoffMatrix a(labels, m);
    try {
        integrate(a, SimplexState{0.3, 0.7}, 0.5, 10.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
    }
}

TEST(SimplexStateTest, Validation)
{
    EXPECT_THROW(SimplexState({0.5, 0.6}), Error);
    EXPECT_THROW(SimplexState({1.1, -0.1}), Error);
    EXPECT_NO_THROW(SimplexState({0.5, 0.5 + 1e-10}));
    const auto p = SimplexState::project(vec({0.6, -0.1, 0.6}));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_EQ(p[1], 0.0);
}

TEST(Converge, BdoepReachesPreferredCoexistence)
{
    const auto traj = converge(build(bdoep(0.5, 0.4)), SimplexState{0.2, 0.3, 0.5});
    EXPECT_TRUE(traj.converged);
    EXPECT_LT(max_abs(traj.terminal_state().values() - vec({0.7, 0.3, 0.0})), 1e-4);
}

TEST(Converge, EquivocatorLosesWhenPreferenceIsStrong)
{
    // delta >= 1 - r: the E vertex repels.
    const auto traj = converge(build(bsoep(0.5, 0.6)), SimplexState{1e-3, 0.0, 1.0 - 1e-3});
    EXPECT_TRUE(traj.converged);
    EXPECT_LT(traj.terminal_state()[2], 1e-6);
}

TEST(Converge, VertexIsImmediatelyConverged)
{
    const auto traj = converge(build(bdoe(0.3)), SimplexState::vertex(3, 2));
    EXPECT_TRUE(traj.converged);
    EXPECT_EQ(traj.times.size(), 1u);
    EXPECT_EQ(traj.terminal_state().values(), vec({0, 0, 1}));
}

TEST(Converge, GivesUpAtMaxT)
{
    const auto traj = converge(build(bdoe(0.3)), SimplexState{0.2, 0.2, 0.6}, 1e-14, 50.0);
    EXPECT_FALSE(traj.converged);
    EXPECT_DOUBLE_EQ(traj.times.back(), 50.0);
}
