#include <gtest/gtest.h>

#include <cmath>

#include "gvnn/theory.hpp"

using namespace gvnn;

// ============================================================================
// IC rank lifting
// ============================================================================

TEST(RankLiftIc, DiagonalCase) {
    std::vector<double> d{1.0, 2.0};
    const auto rep = check_rank_lift_ic(d, Matrix::identity(2));
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.margin, 1.0, 1e-12);  // smallest eigenvalue of diag(1,4)
}

TEST(RankLiftIc, RandomSpdPasses) {
    Rng rng(200);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d(8);
        for (auto& v : d) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 1.5);
        const auto rep = check_rank_lift_ic(d, random_spd(rng, 8));
        EXPECT_TRUE(rep.passed) << rep.witness;
        EXPECT_GT(rep.margin, 0.0);
    }
}

TEST(RankLiftIc, ZeroEntryViolatesHypothesis) {
    Rng rng(201);
    std::vector<double> d{0.5, 0.0, 1.0};
    EXPECT_THROW(check_rank_lift_ic(d, random_spd(rng, 3)), HypothesisViolatedError);
}

TEST(RankLiftIc, IndefiniteSupportViolatesHypothesis) {
    std::vector<double> d{1.0, 1.0};
    EXPECT_THROW(check_rank_lift_ic(d, Matrix(2, 2, {0.0, 1.0, 1.0, 0.0})),
                 HypothesisViolatedError);
}

// ============================================================================
// Gershgorin-Dirichlet
// ============================================================================

TEST(GershgorinDirichlet, ConstantSignalZeroEnergy) {
    Rng rng(210);
    std::vector<double> x(6, 1.3);
    const auto rep = check_gershgorin_dirichlet(x, random_symmetric(rng, 6));
    EXPECT_TRUE(rep.passed);
    EXPECT_DOUBLE_EQ(rep.lhs, 0.0);
    EXPECT_DOUBLE_EQ(rep.rhs, 0.0);
}

TEST(GershgorinDirichlet, TwoNodeClosedForm) {
    std::vector<double> x{1.0, -1.0};
    Matrix w(2, 2, {0.3, -0.6, -0.6, 0.3});
    // Omega = [[0, c], [c, 0]] with c = -0.6 * 4; rho = |c|, E_abs = |c|
    const auto rep = check_gershgorin_dirichlet(x, w);
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.lhs, 2.4, 1e-12);
    EXPECT_NEAR(rep.rhs, 4.8, 1e-12);
}

TEST(GershgorinDirichlet, RandomTrialsPass) {
    Rng rng(211);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(10);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const auto rep = check_gershgorin_dirichlet(x, random_symmetric(rng, 10));
        EXPECT_TRUE(rep.passed) << rep.witness;
    }
}

// ============================================================================
// LDE rank lifting
// ============================================================================

TEST(LdeRankLift, CorrelationSupportLiftsToFullRank) {
    Rng rng(220);
    const MultivariateSignal sig(random_matrix(rng, 10, 200, -1.0, 1.0));
    const Matrix w = build_support_correlation(sig, false).base;
    std::vector<double> x(10);
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);

    EXPECT_EQ(numeric_rank(node_function_lde(x), 1e-10), 3u);
    const auto rep = check_lde_rank_lift(x, w);
    EXPECT_TRUE(rep.passed) << rep.witness;
    EXPECT_EQ(numeric_rank(hadamard(w, node_function_lde(x)), 1e-7), 10u);
}

TEST(LdeRankLift, ThreeNodeBoundInactive) {
    Rng rng(221);
    std::vector<double> x{0.2, -0.9, 1.4};
    const auto rep = check_lde_rank_lift(x, detail::random_full_support(rng, 3));
    EXPECT_TRUE(rep.passed) << rep.witness;
}

TEST(LdeRankLift, RepeatedValueViolatesHypothesis) {
    Rng rng(222);
    std::vector<double> x{0.5, 0.5, 1.0};
    EXPECT_THROW(check_lde_rank_lift(x, detail::random_full_support(rng, 3)),
                 HypothesisViolatedError);
}

TEST(LdeRankLift, ZeroSupportEntryViolatesHypothesis) {
    std::vector<double> x{0.1, 0.5, 1.0};
    Matrix w(3, 3, 1.0);
    w(0, 1) = 0.0;
    w(1, 0) = 0.0;
    EXPECT_THROW(check_lde_rank_lift(x, w), HypothesisViolatedError);
}

// ============================================================================
// Indefiniteness
// ============================================================================

TEST(IndefinitenessLde, TraceIsAlwaysZero) {
    Rng rng(230);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = detail::random_distinct(rng, 10);
        const auto rep = check_indefiniteness_lde(x, detail::random_full_support(rng, 10));
        EXPECT_TRUE(rep.passed) << rep.witness;
        EXPECT_LE(rep.lhs, 1e-10);
    }
}

TEST(IndefinitenessLde, ConstantSignalDegenerate) {
    Rng rng(231);
    std::vector<double> x(5, 2.0);
    const auto rep = check_indefiniteness_lde(x, random_symmetric(rng, 5));
    EXPECT_TRUE(rep.passed);
    EXPECT_TRUE(rep.degenerate);
}

// ============================================================================
// Amplitude scaling / condition number
// ============================================================================

TEST(AmplitudeScaling, UniformDeviationsAreTight) {
    Rng rng(240);
    std::vector<double> d(6, 0.7);
    const auto rep = check_amplitude_scaling_bounds(d, random_spd(rng, 6));
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.lhs, 0.0, 1e-10);  // both ends saturate
}

TEST(AmplitudeScaling, IdentitySupportGivesSquaredDeviations) {
    std::vector<double> d{0.5, -1.5, 1.0};
    const auto rep = check_amplitude_scaling_bounds(d, Matrix::identity(3));
    EXPECT_TRUE(rep.passed);
}

TEST(AmplitudeScaling, RandomTrialsPass) {
    Rng rng(241);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = detail::random_deviations(rng, 8);
        EXPECT_TRUE(check_amplitude_scaling_bounds(d, random_spd(rng, 8)).passed);
    }
}

TEST(ConditionNumber, UniformDeviationsReduceToSupportCondition) {
    Rng rng(250);
    std::vector<double> d(5, 1.3);
    const auto rep = check_condition_number(d, random_spd(rng, 5));
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.lhs, rep.rhs, 1e-8 * rep.rhs);
}

TEST(ConditionNumber, IdentitySupportExactRatio) {
    std::vector<double> d{0.5, 2.0};
    const auto rep = check_condition_number(d, Matrix::identity(2));
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.lhs, 16.0, 1e-10);
    EXPECT_NEAR(rep.rhs, 16.0, 1e-10);
}

TEST(ConditionNumber, RandomTrialsPass) {
    Rng rng(251);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = detail::random_deviations(rng, 8);
        EXPECT_TRUE(check_condition_number(d, random_spd(rng, 8)).passed);
    }
}

// ============================================================================
// Gershgorin discs
// ============================================================================

TEST(GershgorinDiscs, DiagonalSupportCollapsesToPoints) {
    Matrix w = Matrix::identity(4);
    w(1, 1) = 2.0;
    w(2, 2) = 0.5;
    std::vector<double> d{0.4, -1.0, 1.5, 0.7};
    const auto rep = check_gershgorin_discs_ic(d, w);
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.lhs, 0.0, 1e-12);
}

TEST(GershgorinDiscs, SingleNodeSingleDisc) {
    std::vector<double> d{0.9};
    const auto rep = check_gershgorin_discs_ic(d, Matrix(1, 1, {2.0}));
    EXPECT_TRUE(rep.passed);
}

TEST(GershgorinDiscs, RandomTrialsPass) {
    Rng rng(260);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = detail::random_deviations(rng, 8);
        EXPECT_TRUE(check_gershgorin_discs_ic(d, random_spd(rng, 8)).passed);
    }
}

// ============================================================================
// Parseval
// ============================================================================

TEST(Parseval, ZeroSignal) {
    Rng rng(270);
    const MultivariateSignal sig(Matrix(4, 6));
    const auto rep = check_parseval(sig, SupportMatrix::fixed(random_symmetric(rng, 4)),
                                    NodeFunctionKind::lde());
    EXPECT_TRUE(rep.passed);
    EXPECT_DOUBLE_EQ(rep.lhs, 0.0);
}

TEST(Parseval, RandomSignal) {
    Rng rng(271);
    const MultivariateSignal sig(random_matrix(rng, 8, 16, -2.0, 2.0));
    for (const auto& kind : {NodeFunctionKind::lde(), NodeFunctionKind::ic(true)}) {
        const auto rep =
            check_parseval(sig, SupportMatrix::fixed(random_symmetric(rng, 8)), kind);
        EXPECT_TRUE(rep.passed) << rep.witness;
    }
}

// ============================================================================
// Suite
// ============================================================================

TEST(TheorySuite, ZeroTrialsEmpty) { EXPECT_TRUE(run_theory_suite(124, 0).empty()); }

TEST(TheorySuite, DeterministicUnderSeed) {
    const auto r1 = run_theory_suite(124, 3);
    const auto r2 = run_theory_suite(124, 3);
    ASSERT_EQ(r1.size(), r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        EXPECT_EQ(r1[i].seed, r2[i].seed);
        EXPECT_EQ(r1[i].lhs, r2[i].lhs);
        EXPECT_EQ(r1[i].rhs, r2[i].rhs);
        EXPECT_EQ(r1[i].passed, r2[i].passed);
    }
}

TEST(TheorySuite, ThirtyTrialsAllPass) {
    const auto reports = run_theory_suite(124, 30);
    EXPECT_EQ(reports.size(), 8u * 3u * 30u);
    for (const auto& r : reports) {
        EXPECT_TRUE(r.passed) << theory_claim_name(r.claim) << " n=" << r.n
                              << " trial=" << r.trial << " seed=" << r.seed << " lhs=" << r.lhs
                              << " rhs=" << r.rhs << " " << r.witness;
    }
}
