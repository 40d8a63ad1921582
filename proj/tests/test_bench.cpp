#include <gtest/gtest.h>

#include <cmath>

#include "gvnn/bench.hpp"

using namespace gvnn;

TEST(Bench, EquivalenceGateAndChecksums) {
    BenchConfig cfg;
    cfg.batch = 2;
    cfg.nodes = 6;
    cfg.t_list = {8};
    cfg.repeats = 3;
    const auto summary = run_benchmark(cfg);
    ASSERT_EQ(summary.results.size(), 2u);
    const auto& batched = summary.results[0];
    const auto& naive = summary.results[1];
    EXPECT_EQ(batched.method, BenchMethod::BatchedLowRank);
    EXPECT_EQ(naive.method, BenchMethod::NaiveKron);
    EXPECT_FALSE(naive.skipped);
    EXPECT_NEAR(batched.checksum, naive.checksum, 1e-10 * std::max(1.0, std::fabs(batched.checksum)));
    EXPECT_GT(batched.median_seconds, 0.0);
    EXPECT_GT(naive.median_seconds, 0.0);
}

TEST(Bench, MemoryEstimatesFollowClosedForms) {
    for (std::size_t n : {8u, 16u}) {
        for (std::size_t t : {16u, 32u, 64u}) {
            EXPECT_EQ(naive_bytes_estimate(n, t), 8 * n * t * n * t + 8 * n * n * t);
            EXPECT_EQ(batched_bytes_estimate(n, t), 8 * n * n * t + 8 * n * t);
        }
        // linear vs quadratic scaling, exactly
        EXPECT_EQ(batched_bytes_estimate(n, 64) - batched_bytes_estimate(n, 32),
                  32 * (8 * n * n + 8 * n));
        EXPECT_EQ(naive_bytes_estimate(n, 64) - 8 * n * n * 64,
                  4 * (naive_bytes_estimate(n, 32) - 8 * n * n * 32));
    }
}

TEST(Bench, CapSkipsNaiveButTimesBatched) {
    BenchConfig cfg;
    cfg.batch = 1;
    cfg.nodes = 8;
    cfg.t_list = {16};
    cfg.repeats = 3;
    cfg.kron_cap = 64;  // 8*16 = 128 > 64
    const auto summary = run_benchmark(cfg);
    const auto& batched = summary.results[0];
    const auto& naive = summary.results[1];
    EXPECT_FALSE(batched.skipped);
    EXPECT_GT(batched.median_seconds, 0.0);
    EXPECT_TRUE(naive.skipped);
    EXPECT_DOUBLE_EQ(naive.median_seconds, 0.0);
}

TEST(Bench, NaiveScalesWorseThanBatched) {
    BenchConfig cfg;
    cfg.batch = 2;
    cfg.nodes = 12;
    cfg.t_list = {16, 32, 64};
    cfg.repeats = 3;
    const auto summary = run_benchmark(cfg);
    EXPECT_TRUE(std::isfinite(summary.batched_exponent));
    EXPECT_TRUE(std::isfinite(summary.naive_exponent));
    EXPECT_GT(summary.naive_exponent, summary.batched_exponent);
}

TEST(Bench, ParallelVariantReported) {
    BenchConfig cfg;
    cfg.batch = 4;
    cfg.nodes = 8;
    cfg.t_list = {16};
    cfg.repeats = 3;
    cfg.parallel = true;
    const auto summary = run_benchmark(cfg);
    ASSERT_EQ(summary.results.size(), 3u);
    EXPECT_EQ(summary.results[2].method, BenchMethod::BatchedLowRankParallel);
    EXPECT_GT(summary.results[2].median_seconds, 0.0);
}
