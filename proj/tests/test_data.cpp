#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gvnn/data.hpp"

using namespace gvnn;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

// ============================================================================
// Windowing
// ============================================================================

TEST(MakeWindows, CountArithmetic) {
    Rng rng(300);
    const MultivariateSignal sig(random_matrix(rng, 3, 10));
    const auto ds = make_windows(sig, 3, 1, 1);
    EXPECT_EQ(ds.size(), 7u);
}

TEST(MakeWindows, TargetMatchesHorizonColumn) {
    Rng rng(301);
    const MultivariateSignal sig(random_matrix(rng, 4, 30));
    const auto ds = make_windows(sig, 5, 3, 2);
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const std::size_t start = k * 2;
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_DOUBLE_EQ(ds.inputs[k](i, 0), sig.values(i, start));
            EXPECT_DOUBLE_EQ(ds.targets[k][i], sig.values(i, start + 5 - 1 + 3));
        }
    }
}

TEST(MakeWindows, TooShortBoundary) {
    Rng rng(302);
    const MultivariateSignal sig(random_matrix(rng, 2, 6));
    EXPECT_THROW(make_windows(sig, 3, 5), TooShortError);
    EXPECT_NO_THROW(make_windows(sig, 3, 3));  // exactly one window
    EXPECT_EQ(make_windows(sig, 3, 3).size(), 1u);
}

TEST(MakeWindows, ChronologicalSplitSizes) {
    Rng rng(303);
    const MultivariateSignal sig(random_matrix(rng, 2, 103));  // 100 windows of (3,1)
    const auto ds = make_windows(sig, 3, 1);
    ASSERT_EQ(ds.size(), 100u);
    EXPECT_EQ(ds.indices(Split::Train).size(), 64u);
    EXPECT_EQ(ds.indices(Split::Val).size(), 16u);
    EXPECT_EQ(ds.indices(Split::Test).size(), 20u);

    const auto train = ds.indices(Split::Train);
    const auto val = ds.indices(Split::Val);
    const auto test = ds.indices(Split::Test);
    EXPECT_LT(train.back(), val.front());
    EXPECT_LT(val.back(), test.front());
}

// ============================================================================
// Per-sample z-scoring
// ============================================================================

TEST(ZscorePerSample, ConstantColumnToZero) {
    Matrix x(5, 3, 2.5);
    EXPECT_DOUBLE_EQ(max_abs(zscore_per_sample(x)), 0.0);
}

TEST(ZscorePerSample, StandardizedColumnNearlyUnchanged) {
    // mean 0, unbiased std exactly 1
    Matrix x(4, 1, {1.0, -1.0, std::sqrt(0.5), -std::sqrt(0.5)});
    const Matrix z = zscore_per_sample(x);
    EXPECT_LT(max_abs_diff(z, x), 1.2e-5);
}

TEST(ZscorePerSample, PostConditionMoments) {
    Rng rng(310);
    const Matrix z = zscore_per_sample(random_matrix(rng, 16, 8, -4.0, 4.0));
    for (std::size_t t = 0; t < 8; ++t) {
        double mu = 0;
        for (std::size_t i = 0; i < 16; ++i) mu += z(i, t);
        mu /= 16.0;
        double var = 0;
        for (std::size_t i = 0; i < 16; ++i) var += (z(i, t) - mu) * (z(i, t) - mu);
        var /= 15.0;
        EXPECT_LT(std::fabs(mu), 1e-10);
        EXPECT_LT(std::fabs(std::sqrt(var) - 1.0), 1e-3);
    }
}

// ============================================================================
// Generators
// ============================================================================

TEST(Generators, DeterministicUnderSeed) {
    for (const MapKind kind : {MapKind::CoupledLorenz, MapKind::Hopfield, MapKind::MacArthur}) {
        MapConfig cfg = MapConfig::defaults(kind);
        cfg.length = 64;
        const auto a = simulate(cfg);
        const auto b = simulate(cfg);
        EXPECT_TRUE(a.values == b.values) << map_kind_name(kind);
    }
}

TEST(Generators, SeedsProduceDistinctTrajectories) {
    MapConfig cfg = MapConfig::defaults(MapKind::Hopfield);
    cfg.length = 32;
    const auto a = simulate(cfg);
    cfg.seed = 14;
    const auto b = simulate(cfg);
    EXPECT_GT(max_abs_diff(a.values, b.values), 1e-3);
}

TEST(CoupledLorenz, UncoupledSystemsDecorrelate) {
    MapConfig cfg = MapConfig::defaults(MapKind::CoupledLorenz);
    cfg.coupling = 0.0;
    cfg.length = 10000;
    const auto sig = simulate_coupled_lorenz(cfg);
    // x components live on rows 0, 3, 6
    for (const auto [a, b] : {std::pair<int, int>{0, 3}, {0, 6}, {3, 6}}) {
        const double c = correlation(sig.values.row(a), sig.values.row(b));
        EXPECT_LT(std::fabs(c), 0.2) << "rows " << a << "," << b;
    }
}

TEST(CoupledLorenz, StaysOnAttractor) {
    MapConfig cfg = MapConfig::defaults(MapKind::CoupledLorenz);
    cfg.length = 10000;
    const auto sig = simulate_coupled_lorenz(cfg);
    EXPECT_LT(max_abs(sig.values), 60.0);
}

TEST(CoupledLorenz, NodeCountMustBeTripled) {
    MapConfig cfg = MapConfig::defaults(MapKind::CoupledLorenz);
    cfg.node_count = 10;
    EXPECT_THROW(simulate_coupled_lorenz(cfg), ConfigError);
}

TEST(Hopfield, StatesBoundedByTanh) {
    MapConfig cfg = MapConfig::defaults(MapKind::Hopfield);
    cfg.length = 2000;
    const auto sig = simulate_hopfield(cfg);
    EXPECT_LT(max_abs(sig.values), 1.0);
}

TEST(Hopfield, PositiveLyapunovProbe) {
    // two-trajectory divergence probe from a post-transient state
    MapConfig cfg = MapConfig::defaults(MapKind::Hopfield);
    cfg.length = 8;
    const auto sig = simulate_hopfield(cfg);
    const Matrix wh = hopfield_coupling(cfg);

    std::vector<double> sa = sig.values.col(0);
    std::vector<double> sb = sa;
    const double sep = 1e-8;
    sb[0] += sep;
    const int steps = 25;
    for (int s = 0; s < steps; ++s) {
        sa = hopfield_step(wh, sa, cfg.gain);
        sb = hopfield_step(wh, sb, cfg.gain);
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) dist += (sa[i] - sb[i]) * (sa[i] - sb[i]);
    dist = std::sqrt(dist);
    const double lyapunov = std::log(dist / sep) / steps;
    EXPECT_GT(lyapunov, 0.0);
}

TEST(MacArthur, PositiveAndNonConstant) {
    MapConfig cfg = MapConfig::defaults(MapKind::MacArthur);
    cfg.length = 2000;
    const auto sig = simulate_macarthur(cfg);
    for (std::size_t i = 0; i < sig.values.size(); ++i) EXPECT_GT(sig.values.data()[i], 0.0);
    for (std::size_t i = 0; i < sig.node_count(); ++i) {
        double mu = 0;
        for (std::size_t t = 0; t < sig.length(); ++t) mu += sig.values(i, t);
        mu /= static_cast<double>(sig.length());
        double var = 0;
        for (std::size_t t = 0; t < sig.length(); ++t)
            var += (sig.values(i, t) - mu) * (sig.values(i, t) - mu);
        var /= static_cast<double>(sig.length() - 1);
        EXPECT_GT(std::sqrt(var), 0.01) << "channel " << i;
    }
}

// ============================================================================
// CSV
// ============================================================================

TEST(CsvSignal, LiteralRoundTrip) {
    const auto path = temp_path("gvnn_literal.csv");
    write_file(path.string(), "# comment line\n1,2,3\n4,5,6\n");
    const auto sig = load_csv_signal(path.string());
    EXPECT_EQ(sig.node_count(), 2u);
    EXPECT_EQ(sig.length(), 3u);
    EXPECT_DOUBLE_EQ(sig.values(1, 2), 6.0);
    std::filesystem::remove(path);
}

TEST(CsvSignal, TransposeOfTransposeIsIdentity) {
    Rng rng(320);
    const Matrix m = random_matrix(rng, 3, 7);
    const auto path = temp_path("gvnn_transpose.csv");
    write_csv_matrix(path.string(), m);
    const auto once = load_csv_signal(path.string(), true);
    write_csv_matrix(path.string(), once.values);
    const auto twice = load_csv_signal(path.string(), true);
    EXPECT_TRUE(twice.values == m);
    std::filesystem::remove(path);
}

TEST(CsvSignal, WriteReadExactPrecision) {
    Rng rng(321);
    Matrix m = random_matrix(rng, 4, 9, -1e6, 1e6);
    m(0, 0) = 1.0 / 3.0;
    m(1, 1) = 1e-300;
    const auto path = temp_path("gvnn_precision.csv");
    write_csv_matrix(path.string(), m, {"gvnn-kit test"});
    const auto back = load_csv_signal(path.string());
    EXPECT_TRUE(back.values == m);  // bit-exact through %.17g
    std::filesystem::remove(path);
}

TEST(CsvSignal, ParseErrorsCarryPosition) {
    const auto path = temp_path("gvnn_bad.csv");
    write_file(path.string(), "1,2\n3,oops\n");
    try {
        load_csv_signal(path.string());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_EQ(e.col(), 2u);
    }
    std::filesystem::remove(path);
}

TEST(CsvSignal, RaggedRowsRejected) {
    const auto path = temp_path("gvnn_ragged.csv");
    write_file(path.string(), "1,2,3\n4,5\n");
    EXPECT_THROW(load_csv_signal(path.string()), RaggedRowsError);
    std::filesystem::remove(path);
}
