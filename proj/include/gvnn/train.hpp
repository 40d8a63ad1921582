#pragma once

#include <chrono>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gvnn/data.hpp"
#include "gvnn/model.hpp"

// Adam, MSE, and the forecasting training loop: deterministic per-epoch
// shuffles, per-sample normalization, best-validation checkpointing, and
// test evaluation from the retained checkpoint.

namespace gvnn {

// ============================================================================
// Adam
// ============================================================================

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

/// Flat view over a parameter (or gradient) set; the update walks spans in a
/// fixed order so params and grads stay aligned.
struct FlatView {
    std::vector<std::span<double>> spans;

    std::size_t total() const {
        std::size_t acc = 0;
        for (const auto& s : spans) acc += s.size();
        return acc;
    }
};

/// Standard Adam with bias correction. State tensors are allocated lazily on
/// the first call and must keep their size afterwards.
inline void adam_step(FlatView params, const FlatView& grads, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    const std::size_t total = params.total();
    if (grads.total() != total) {
        throw ShapeMismatchError("adam_step: " + std::to_string(total) + " parameters vs " +
                                 std::to_string(grads.total()) + " gradients");
    }
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
    } else if (state.m.size() != total) {
        throw ShapeMismatchError("adam_step: state size changed");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    std::size_t k = 0;
    for (std::size_t s = 0; s < params.spans.size(); ++s) {
        auto p = params.spans[s];
        const auto g = grads.spans[s];
        if (p.size() != g.size()) throw ShapeMismatchError("adam_step: span shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i, ++k) {
            state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g[i];
            state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = state.m[k] / c1;
            const double vhat = state.v[k] / c2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// ============================================================================
// Loss
// ============================================================================

struct MseResult {
    double loss = 0.0;
    std::vector<double> d_pred;
};

inline MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) throw DimMismatchError("mse_loss: length mismatch");
    MseResult r;
    r.d_pred.resize(pred.size());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        r.loss += e * e * inv_n;
        r.d_pred[i] = 2.0 * e * inv_n;
    }
    return r;
}

// ============================================================================
// Parameter flattening
// ============================================================================

inline FlatView model_param_view(GvnnModel& model, bool freeze_b = false) {
    FlatView v;
    for (auto& layer : model.layers) {
        v.spans.push_back(layer.a);
        if (!freeze_b) v.spans.push_back(layer.b);
        v.spans.push_back({layer.theta.data(), layer.theta.size()});
        switch (layer.support.param) {
            case SupportParam::Fixed: break;
            case SupportParam::DenseTrainable:
                v.spans.push_back({layer.support.base.data(), layer.support.base.size()});
                break;
            case SupportParam::AdditiveLowRank:
            case SupportParam::HadamardLowRank:
                v.spans.push_back({layer.support.factor_a.data(), layer.support.factor_a.size()});
                v.spans.push_back({layer.support.factor_b.data(), layer.support.factor_b.size()});
                break;
        }
    }
    v.spans.push_back({model.readout.w1.data(), model.readout.w1.size()});
    v.spans.push_back(model.readout.b1);
    v.spans.push_back({model.readout.w2.data(), model.readout.w2.size()});
    v.spans.push_back(model.readout.b2);
    return v;
}

/// Must walk the same order as model_param_view.
inline FlatView grad_view(ModelGrads& grads, const GvnnModel& model, bool freeze_b = false) {
    FlatView v;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& lg = grads.layers[l];
        v.spans.push_back(lg.d_a);
        if (!freeze_b) v.spans.push_back(lg.d_b);
        v.spans.push_back({lg.d_theta.data(), lg.d_theta.size()});
        switch (model.layers[l].support.param) {
            case SupportParam::Fixed: break;
            case SupportParam::DenseTrainable:
                v.spans.push_back({lg.d_support_base.data(), lg.d_support_base.size()});
                break;
            case SupportParam::AdditiveLowRank:
            case SupportParam::HadamardLowRank:
                v.spans.push_back({lg.d_factor_a.data(), lg.d_factor_a.size()});
                v.spans.push_back({lg.d_factor_b.data(), lg.d_factor_b.size()});
                break;
        }
    }
    v.spans.push_back({grads.readout.d_w1.data(), grads.readout.d_w1.size()});
    v.spans.push_back(grads.readout.d_b1);
    v.spans.push_back({grads.readout.d_w2.data(), grads.readout.d_w2.size()});
    v.spans.push_back(grads.readout.d_b2);
    return v;
}

// ============================================================================
// Example normalization
// ============================================================================

/// Inputs are z-scored per sample across channels. The target column is
/// normalized with the across-channel statistics of the LAST raw input
/// column, which are available at prediction time and make reported MSEs
/// comparable across models (in these normalized units the persistence
/// baseline is exactly the last normalized input column).
struct NormalizedExample {
    Matrix input;
    std::vector<double> target;
};

inline NormalizedExample normalize_example(const Matrix& window,
                                           std::span<const double> target) {
    NormalizedExample ex;
    ZscoreStats stats;
    ex.input = zscore_columns(window, kZscoreEps, &stats);
    const double mu = stats.mean.back();
    const double denom = stats.sd.back() + kZscoreEps;
    ex.target.resize(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) ex.target[i] = (target[i] - mu) / denom;
    return ex;
}

// ============================================================================
// Training loop
// ============================================================================

struct TrainConfig {
    double lr = 1e-4;
    std::size_t epochs = 500;
    std::size_t batch = 128;
    std::uint64_t seed = 124;
    double weight_decay = 0.0;
    std::size_t horizon = 1;
    std::size_t window = 3;
    double clip_norm = 0.0;  // 0 disables gradient clipping
    bool freeze_b = false;   // support-free ablation: graph tap pinned at its init

    void validate() const {
        if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch < 1) throw ConfigError("batch size must be >= 1");
    }
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;
    double best_val = 0.0;
    double test_mse = 0.0;
    double wall_seconds = 0.0;  // timing-only field; excluded from determinism checks
    TrainConfig config;
};

inline double evaluate_mse(const WindowedDataset& ds, Split split, const GvnnModel& model) {
    const auto idx = ds.indices(split);
    if (idx.empty()) throw DataError(std::string("empty split: ") + split_name(split));
    double acc = 0.0;
    for (const std::size_t k : idx) {
        const auto ex = normalize_example(ds.inputs[k], ds.targets[k]);
        const auto pred = model_forward(ex.input, model);
        acc += mse_loss(pred, ex.target).loss;
    }
    return acc / static_cast<double>(idx.size());
}

/// Trivial reference: predict the last normalized input column.
inline double persistence_mse(const WindowedDataset& ds, Split split) {
    const auto idx = ds.indices(split);
    if (idx.empty()) throw DataError(std::string("empty split: ") + split_name(split));
    double acc = 0.0;
    for (const std::size_t k : idx) {
        const auto ex = normalize_example(ds.inputs[k], ds.targets[k]);
        const auto pred = ex.input.col(ex.input.cols() - 1);
        acc += mse_loss(pred, ex.target).loss;
    }
    return acc / static_cast<double>(idx.size());
}

inline TrainReport train_forecaster(const WindowedDataset& ds, GvnnModel& model,
                                    const TrainConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto train_idx = ds.indices(Split::Train);
    if (train_idx.empty() || ds.indices(Split::Val).empty() || ds.indices(Split::Test).empty()) {
        throw DataError("train_forecaster: dataset must populate all three splits");
    }

    TrainReport report;
    report.config = cfg;
    AdamState adam;
    GvnnModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive(cfg.seed, "shuffle/" + std::to_string(epoch)));
        const auto perm = shuffle_rng.permutation(train_idx.size());

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < perm.size(); begin += cfg.batch) {
            const std::size_t count = std::min(cfg.batch, perm.size() - begin);
            ModelGrads grads = zero_grads(model);
            double batch_loss = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                const std::size_t k = train_idx[perm[begin + j]];
                const auto ex = normalize_example(ds.inputs[k], ds.targets[k]);
                ModelCache cache;
                const auto pred = model_forward(ex.input, model, &cache);
                auto mse = mse_loss(pred, ex.target);
                batch_loss += mse.loss;
                for (auto& g : mse.d_pred) g /= static_cast<double>(count);
                grads.accumulate(model_backward(model, cache, mse.d_pred));
            }
            batch_loss /= static_cast<double>(count);
            if (!std::isfinite(batch_loss)) {
                throw NonFiniteError("train_forecaster: loss diverged at epoch " +
                                     std::to_string(epoch));
            }
            epoch_loss += batch_loss * static_cast<double>(count);
            seen += count;

            auto gview = grad_view(grads, model, cfg.freeze_b);
            auto pview = model_param_view(model, cfg.freeze_b);
            if (cfg.weight_decay > 0.0) {
                for (std::size_t s = 0; s < gview.spans.size(); ++s)
                    for (std::size_t i = 0; i < gview.spans[s].size(); ++i)
                        gview.spans[s][i] += cfg.weight_decay * pview.spans[s][i];
            }
            if (cfg.clip_norm > 0.0) {
                double norm_sq = 0.0;
                for (const auto& s : gview.spans)
                    for (double g : s) norm_sq += g * g;
                const double norm = std::sqrt(norm_sq);
                if (norm > cfg.clip_norm) {
                    const double scl = cfg.clip_norm / norm;
                    for (auto& s : gview.spans)
                        for (double& g : s) g *= scl;
                }
            }
            adam_step(pview, gview, adam, cfg.lr);
        }
        if (!model.all_finite()) {
            throw NonFiniteError("train_forecaster: parameters diverged at epoch " +
                                 std::to_string(epoch));
        }

        report.train_loss.push_back(epoch_loss / static_cast<double>(seen));
        const double val = evaluate_mse(ds, Split::Val, model);
        report.val_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            best_epoch = epoch;
            best = model;
        }
    }

    model = best;
    report.best_epoch = best_epoch;
    report.best_val = best_val;
    report.test_mse = evaluate_mse(ds, Split::Test, model);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace gvnn
