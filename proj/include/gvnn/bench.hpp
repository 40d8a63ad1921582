#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "gvnn/gvsa.hpp"
#include "gvnn/linalg.hpp"

// Empirical check of the complexity separation between the batched per-time
// convolution (linear in T) and the materialized Kronecker kernel (quadratic
// in T). Output equivalence is verified before any timing is accepted, and
// fitted log-log exponents over the T axis quantify the trend.

namespace gvnn {

enum class BenchMethod : int { NaiveKron, BatchedLowRank, BatchedLowRankParallel };

inline const char* bench_method_name(BenchMethod m) {
    switch (m) {
        case BenchMethod::NaiveKron: return "naive_kron";
        case BenchMethod::BatchedLowRank: return "batched_low_rank";
        case BenchMethod::BatchedLowRankParallel: return "batched_low_rank_parallel";
    }
    return "?";
}

struct BenchResult {
    BenchMethod method = BenchMethod::BatchedLowRank;
    std::size_t batch = 0;
    std::size_t nodes = 0;
    std::size_t time_len = 0;
    double median_seconds = 0.0;  // wall-clock column; everything else is deterministic
    std::size_t est_bytes = 0;
    double checksum = 0.0;
    bool skipped = false;  // naive refused by the memory cap
};

struct BenchConfig {
    std::size_t batch = 8;
    std::size_t nodes = 16;
    std::vector<std::size_t> t_list = {64, 128, 256, 512};
    std::size_t repeats = 7;
    std::uint64_t seed = 124;
    bool parallel = false;  // additionally time a threads-over-batch variant
    std::size_t kron_cap = kKronDefaultCap;
};

struct BenchSummary {
    std::vector<BenchResult> results;
    double batched_exponent = 0.0;
    double naive_exponent = 0.0;
    double parallel_exponent = 0.0;
};

/// Peak allocation of one naive invocation: the (NT)^2 kernel plus the
/// per-sample slice tensor. Quadratic in T by construction.
inline std::size_t naive_bytes_estimate(std::size_t n, std::size_t t) {
    return 8 * (n * t) * (n * t) + 8 * n * n * t;
}

/// Peak allocation of one batched per-sample pass: the slice tensor plus the
/// output columns. Linear in T by construction.
inline std::size_t batched_bytes_estimate(std::size_t n, std::size_t t) {
    return 8 * n * n * t + 8 * n * t;
}

namespace detail {

inline double plain_sum(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) acc += m.data()[i];
    return acc;
}

/// Least-squares slope of log(time) against log(T).
inline double fit_exponent(const std::vector<std::pair<std::size_t, double>>& points) {
    if (points.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [t, secs] : points) {
        const double x = std::log(static_cast<double>(t));
        const double y = std::log(secs);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Median of `repeats` timed invocations after one discarded warmup. Fast
/// invocations loop inside the timed region so each measurement stays above
/// a few milliseconds.
template <typename Fn>
inline double median_seconds(Fn&& fn, std::size_t repeats) {
    using clock = std::chrono::steady_clock;
    const auto once = [&]() {
        const auto t0 = clock::now();
        fn();
        return std::chrono::duration<double>(clock::now() - t0).count();
    };
    const double warmup = once();
    std::size_t inner = 1;
    constexpr double kTargetSeconds = 3e-3;
    if (warmup < kTargetSeconds) {
        inner = static_cast<std::size_t>(kTargetSeconds / std::max(warmup, 1e-9)) + 1;
    }
    std::vector<double> times;
    times.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = clock::now();
        for (std::size_t k = 0; k < inner; ++k) fn();
        times.push_back(std::chrono::duration<double>(clock::now() - t0).count() /
                        static_cast<double>(inner));
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace detail

/// For each T: builds a batch of random signals, verifies that the batched
/// path and the Kronecker oracle (L_T = I) produce the same output, then
/// times both and fits per-method T-exponents. Naive runs that exceed the
/// memory cap are flagged and skipped; the batched method is timed anyway.
inline BenchSummary run_benchmark(const BenchConfig& cfg) {
    if (cfg.t_list.empty()) throw ConfigError("run_benchmark: empty T list");
    BenchSummary summary;
    std::vector<std::pair<std::size_t, double>> batched_pts, naive_pts, parallel_pts;

    for (const std::size_t t_len : cfg.t_list) {
        Rng rng(Rng::derive(cfg.seed, "bench/" + std::to_string(t_len)));
        std::vector<MultivariateSignal> signals;
        signals.reserve(cfg.batch);
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            signals.emplace_back(random_matrix(rng, cfg.nodes, t_len, -1.0, 1.0));
        }
        const SupportMatrix support = SupportMatrix::fixed(random_symmetric(rng, cfg.nodes));
        const NodeFunctionKind kind = NodeFunctionKind::lde();

        const auto batched_one = [&](const MultivariateSignal& sig) {
            const auto gvt = graph_variate_tensor(sig, support, kind, false, false);
            return batched_matvec(gvt.slices, sig.values);
        };

        const bool naive_fits = cfg.nodes * t_len <= cfg.kron_cap;
        double checksum_batched = 0.0;
        double checksum_naive = 0.0;
        if (naive_fits) {
            // equivalence gate before any timing
            const Matrix identity_t = Matrix::identity(t_len);
            for (const auto& sig : signals) {
                const Matrix yb = batched_one(sig);
                const Matrix yn = kron_apply_naive(sig, support, kind, identity_t, cfg.kron_cap);
                if (max_abs_diff(yb, yn) > 1e-10) {
                    throw NumericError("run_benchmark: method outputs disagree at T=" +
                                       std::to_string(t_len));
                }
                checksum_batched += detail::plain_sum(yb);
                checksum_naive += detail::plain_sum(yn);
            }
        } else {
            for (const auto& sig : signals) checksum_batched += detail::plain_sum(batched_one(sig));
        }

        BenchResult batched;
        batched.method = BenchMethod::BatchedLowRank;
        batched.batch = cfg.batch;
        batched.nodes = cfg.nodes;
        batched.time_len = t_len;
        batched.est_bytes = batched_bytes_estimate(cfg.nodes, t_len);
        batched.checksum = checksum_batched;
        batched.median_seconds = detail::median_seconds(
            [&]() {
                for (const auto& sig : signals) batched_one(sig);
            },
            cfg.repeats);
        batched_pts.emplace_back(t_len, batched.median_seconds);
        summary.results.push_back(batched);

        BenchResult naive;
        naive.method = BenchMethod::NaiveKron;
        naive.batch = cfg.batch;
        naive.nodes = cfg.nodes;
        naive.time_len = t_len;
        naive.est_bytes = naive_bytes_estimate(cfg.nodes, t_len);
        naive.checksum = checksum_naive;
        naive.skipped = !naive_fits;
        if (naive_fits) {
            const Matrix identity_t = Matrix::identity(t_len);
            naive.median_seconds = detail::median_seconds(
                [&]() {
                    for (const auto& sig : signals)
                        kron_apply_naive(sig, support, kind, identity_t, cfg.kron_cap);
                },
                cfg.repeats);
            naive_pts.emplace_back(t_len, naive.median_seconds);
        }
        summary.results.push_back(naive);

        if (cfg.parallel) {
            BenchResult par = batched;
            par.method = BenchMethod::BatchedLowRankParallel;
            par.median_seconds = detail::median_seconds(
                [&]() {
                    std::vector<std::thread> pool;
                    pool.reserve(signals.size());
                    for (const auto& sig : signals)
                        pool.emplace_back([&sig, &batched_one]() { batched_one(sig); });
                    for (auto& th : pool) th.join();
                },
                cfg.repeats);
            parallel_pts.emplace_back(t_len, par.median_seconds);
            summary.results.push_back(par);
        }
    }

    summary.batched_exponent = detail::fit_exponent(batched_pts);
    summary.naive_exponent = detail::fit_exponent(naive_pts);
    summary.parallel_exponent = detail::fit_exponent(parallel_pts);
    return summary;
}

}  // namespace gvnn
