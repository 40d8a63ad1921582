#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gvnn/model.hpp"

// Central finite-difference checks of the hand-derived backward passes.
// Step 1e-5 on z-scored-scale inputs; relative error against
// max(1e-8, |analytic| + |numeric|). Test points are drawn away from the
// LeakyReLU / |.| / degree-clamp kinks and away from vanishing gradients,
// so the subgradient conventions never make the comparison ambiguous.

using namespace gvnn;

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-4;

double weighted_sum(const Matrix& y, const Matrix& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y.data()[i] * w.data()[i];
    return acc;
}

double rel_err(double analytic, double numeric) {
    return std::fabs(analytic - numeric) /
           std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
}

struct Slot {
    double* ptr;
    double analytic;
    std::string label;
};

void append_matrix_slots(std::vector<Slot>& slots, Matrix& m, const Matrix& g,
                         const std::string& label) {
    ASSERT_EQ(m.size(), g.size()) << label;
    for (std::size_t i = 0; i < m.size(); ++i)
        slots.push_back({m.data() + i, g.data()[i], label + "[" + std::to_string(i) + "]"});
}

double check_slots(std::vector<Slot>& slots, const std::function<double()>& loss) {
    double worst = 0.0;
    for (auto& s : slots) {
        const double orig = *s.ptr;
        *s.ptr = orig + kFdStep;
        const double lp = loss();
        *s.ptr = orig - kFdStep;
        const double lm = loss();
        *s.ptr = orig;
        const double numeric = (lp - lm) / (2.0 * kFdStep);
        const double err = rel_err(s.analytic, numeric);
        EXPECT_LT(err, kFdTol) << s.label << ": analytic " << s.analytic << " vs numeric "
                               << numeric;
        worst = std::max(worst, err);
    }
    return worst;
}

// Margins that keep +-kFdStep bumps on one side of every kink, and keep all
// live gradient entries large enough that finite-difference roundoff noise
// cannot dominate the comparison.
bool layer_point_is_generic(const Matrix& x, const GvnnLayerParams& p, const Matrix& wloss) {
    GvnnLayerCache cache;
    gvnn_forward(x, p, &cache);
    for (std::size_t i = 0; i < cache.pre.size(); ++i)
        if (std::fabs(cache.pre.data()[i]) < 1e-3) return false;
    if (p.kind.uses_ic()) {
        for (std::size_t i = 0; i < cache.xp.rows(); ++i)
            for (std::size_t t = 0; t < cache.xp.cols(); ++t)
                if (std::fabs(cache.xp(i, t) - cache.mu[i]) < 2e-3) return false;
    }
    if (p.renormalize) {
        for (std::size_t i = 0; i < cache.deg.size(); ++i)
            if (cache.deg.data()[i] < kRenormEps + 1e-3) return false;
    }
    const auto g = gvnn_backward(cache, wloss);
    const auto live = [](const double* d, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i)
            if (d[i] != 0.0 && std::fabs(d[i]) < 3e-6) return false;
        return true;
    };
    if (!live(g.d_a.data(), g.d_a.size()) || !live(g.d_b.data(), g.d_b.size())) return false;
    if (!live(g.d_theta.data(), g.d_theta.size())) return false;
    if (!live(g.d_support_base.data(), g.d_support_base.size())) return false;
    if (!live(g.d_factor_a.data(), g.d_factor_a.size())) return false;
    if (!live(g.d_factor_b.data(), g.d_factor_b.size())) return false;
    if (!live(g.d_input.data(), g.d_input.size())) return false;
    return true;
}

GvnnLayerParams random_layer(Rng& rng, std::size_t n, std::size_t t_len, NodeFunctionKind kind,
                             bool renormalize, bool zave, SupportParam sp) {
    GvnnLayerParams p;
    p.a.resize(t_len);
    p.b.resize(t_len);
    for (auto& v : p.a) v = rng.uniform(0.5, 1.5);
    for (auto& v : p.b) v = rng.uniform(-0.8, 0.8);
    p.theta = Matrix::identity(t_len);
    for (std::size_t i = 0; i < p.theta.size(); ++i) p.theta.data()[i] += 0.3 * rng.normal();
    const Matrix base = random_symmetric(rng, n, -1.0, 1.0);
    switch (sp) {
        case SupportParam::Fixed: p.support = SupportMatrix::fixed(base); break;
        case SupportParam::DenseTrainable: p.support = SupportMatrix::dense_trainable(base); break;
        case SupportParam::AdditiveLowRank:
            p.support = SupportMatrix::additive_low_rank(base, 2, rng);
            p.support.factor_a = random_matrix(rng, n, 2, -0.6, 0.6);
            p.support.factor_b = random_matrix(rng, 2, n, -0.6, 0.6);
            break;
        case SupportParam::HadamardLowRank:
            p.support = SupportMatrix::hadamard_low_rank(base, 2, rng);
            p.support.factor_a = random_matrix(rng, n, 2, 0.4, 1.2);
            p.support.factor_b = random_matrix(rng, 2, n, 0.4, 1.2);
            break;
    }
    p.kind = kind;
    p.renormalize = renormalize;
    p.zave = zave;
    return p;
}

// One full layer check: all parameter entries plus the input.
void check_layer_config(NodeFunctionKind kind, bool renormalize, bool zave, SupportParam sp,
                        std::uint64_t base_seed) {
    const std::size_t n = 4, t_len = 5;
    Matrix x;
    GvnnLayerParams p;
    Matrix wloss;
    bool found = false;
    for (std::uint64_t k = 0; k < 100 && !found; ++k) {
        Rng rng(base_seed + k);
        x = random_matrix(rng, n, t_len, -1.2, 1.2);
        p = random_layer(rng, n, t_len, kind, renormalize, zave, sp);
        wloss = random_matrix(rng, n, t_len, -1.0, 1.0);
        found = layer_point_is_generic(x, p, wloss);
    }
    ASSERT_TRUE(found) << "no generic test point found";

    GvnnLayerCache cache;
    gvnn_forward(x, p, &cache);
    const auto g = gvnn_backward(cache, wloss);

    std::vector<Slot> slots;
    for (std::size_t t = 0; t < t_len; ++t) {
        slots.push_back({&p.a[t], g.d_a[t], "a[" + std::to_string(t) + "]"});
        slots.push_back({&p.b[t], g.d_b[t], "b[" + std::to_string(t) + "]"});
    }
    append_matrix_slots(slots, p.theta, g.d_theta, "theta");
    switch (sp) {
        case SupportParam::Fixed: break;
        case SupportParam::DenseTrainable:
            append_matrix_slots(slots, p.support.base, g.d_support_base, "W");
            break;
        case SupportParam::AdditiveLowRank:
        case SupportParam::HadamardLowRank:
            append_matrix_slots(slots, p.support.factor_a, g.d_factor_a, "A");
            append_matrix_slots(slots, p.support.factor_b, g.d_factor_b, "B");
            break;
    }
    append_matrix_slots(slots, x, g.d_input, "x");

    const auto loss = [&]() { return weighted_sum(gvnn_forward(x, p), wloss); };
    check_slots(slots, loss);
}

}  // namespace

// Every node function x renormalize x zave combination, trainable dense W.
TEST(LayerGradients, FullConfigurationGrid) {
    const std::vector<NodeFunctionKind> kinds = {
        NodeFunctionKind::lde(), NodeFunctionKind::ic(true), NodeFunctionKind::ic(false),
        NodeFunctionKind::combo(0.7, 0.5)};
    std::uint64_t seed = 1000;
    for (const auto& kind : kinds)
        for (bool renorm : {false, true})
            for (bool zave : {false, true}) {
                SCOPED_TRACE(kind.name() + (renorm ? "+renorm" : "") + (zave ? "+zave" : ""));
                check_layer_config(kind, renorm, zave, SupportParam::DenseTrainable,
                                   seed += 1000);
            }
}

TEST(LayerGradients, LowRankSupports) {
    check_layer_config(NodeFunctionKind::lde(), true, true, SupportParam::AdditiveLowRank, 40000);
    check_layer_config(NodeFunctionKind::ic(true), true, true, SupportParam::HadamardLowRank,
                       50000);
    check_layer_config(NodeFunctionKind::combo(0.5, 0.8), false, true,
                       SupportParam::AdditiveLowRank, 60000);
}

TEST(LayerGradients, FixedSupportInputGradient) {
    check_layer_config(NodeFunctionKind::lde(), true, false, SupportParam::Fixed, 70000);
}

// theta gradient with b = 0 collapses to the plain linear-layer rule
// d_theta = Z^T dPre with Z = X' D_a; finite differences agree.
TEST(LayerGradients, ThetaReducesToLinearLayerWhenGraphTapOff) {
    Rng rng(80000);
    const std::size_t n = 4, t_len = 5;
    const Matrix x = random_matrix(rng, n, t_len);
    GvnnLayerParams p =
        random_layer(rng, n, t_len, NodeFunctionKind::lde(), false, false, SupportParam::Fixed);
    p.b.assign(t_len, 0.0);
    const Matrix wloss = random_matrix(rng, n, t_len);

    GvnnLayerCache cache;
    gvnn_forward(x, p, &cache);
    const auto g = gvnn_backward(cache, wloss);

    Matrix d_pre(n, t_len);
    for (std::size_t i = 0; i < d_pre.size(); ++i)
        d_pre.data()[i] = wloss.data()[i] * leaky_relu_grad(cache.pre.data()[i], p.leaky_slope);
    Matrix z(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t i = 0; i < n; ++i) z(i, t) = p.a[t] * x(i, t);
    EXPECT_LT(max_abs_diff(g.d_theta, matmul(transpose(z), d_pre)), 1e-12);

    std::vector<Slot> slots;
    append_matrix_slots(slots, p.theta, g.d_theta, "theta");
    const auto loss = [&]() {
        Matrix xc = x;
        return weighted_sum(gvnn_forward(xc, p), wloss);
    };
    check_slots(slots, loss);
}

TEST(IcAbsSubgradient, SignConvention) {
    EXPECT_DOUBLE_EQ(ic_abs_subgradient(3.0), 1.0);
    EXPECT_DOUBLE_EQ(ic_abs_subgradient(-2.0), -1.0);
    EXPECT_DOUBLE_EQ(ic_abs_subgradient(0.0), 0.0);
}

// ============================================================================
// Whole model: layers + readout + input
// ============================================================================

TEST(ModelGradients, TwoLayerModelMatchesFiniteDifferences) {
    const std::size_t n = 3, t_len = 4, hidden = 6;
    Matrix x;
    GvnnModel model;
    std::vector<double> wloss(n);

    bool found = false;
    for (std::uint64_t k = 0; k < 100 && !found; ++k) {
        Rng rng(90000 + k);
        const auto support = SupportMatrix::dense_trainable(random_symmetric(rng, n));
        model = make_model(n, t_len, {NodeFunctionKind::lde(), NodeFunctionKind::ic(true)},
                           support, true, true, hidden, rng);
        x = random_matrix(rng, n, t_len, -1.2, 1.2);
        for (auto& v : wloss) v = rng.uniform(-1.0, 1.0);

        ModelCache cache;
        model_forward(x, model, &cache);
        found = true;
        for (const auto& lc : cache.layer_caches) {
            for (std::size_t i = 0; i < lc.pre.size(); ++i)
                if (std::fabs(lc.pre.data()[i]) < 1e-3) found = false;
            if (lc.kind.uses_ic()) {
                for (std::size_t i = 0; i < lc.xp.rows(); ++i)
                    for (std::size_t t = 0; t < lc.xp.cols(); ++t)
                        if (std::fabs(lc.xp(i, t) - lc.mu[i]) < 2e-3) found = false;
            }
            for (std::size_t i = 0; i < lc.deg.size(); ++i)
                if (lc.deg.data()[i] < kRenormEps + 1e-3) found = false;
        }
        for (double hp : cache.readout_cache.h_pre)
            if (std::fabs(hp) < 1e-3) found = false;
    }
    ASSERT_TRUE(found);

    ModelCache cache;
    model_forward(x, model, &cache);
    const auto g = model_backward(model, cache, wloss);

    std::vector<Slot> slots;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& p = model.layers[l];
        const auto& lg = g.layers[l];
        const std::string tag = "layer" + std::to_string(l) + ".";
        for (std::size_t t = 0; t < t_len; ++t) {
            slots.push_back({&p.a[t], lg.d_a[t], tag + "a"});
            slots.push_back({&p.b[t], lg.d_b[t], tag + "b"});
        }
        append_matrix_slots(slots, p.theta, lg.d_theta, tag + "theta");
        append_matrix_slots(slots, p.support.base, lg.d_support_base, tag + "W");
    }
    append_matrix_slots(slots, model.readout.w1, g.readout.d_w1, "readout.w1");
    append_matrix_slots(slots, model.readout.w2, g.readout.d_w2, "readout.w2");
    for (std::size_t i = 0; i < model.readout.b1.size(); ++i)
        slots.push_back({&model.readout.b1[i], g.readout.d_b1[i], "readout.b1"});
    for (std::size_t i = 0; i < model.readout.b2.size(); ++i)
        slots.push_back({&model.readout.b2[i], g.readout.d_b2[i], "readout.b2"});
    append_matrix_slots(slots, x, g.d_input, "x");

    const auto loss = [&]() {
        const auto pred = model_forward(x, model);
        double acc = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) acc += pred[i] * wloss[i];
        return acc;
    };
    check_slots(slots, loss);
}
