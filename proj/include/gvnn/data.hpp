#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gvnn/gvsa.hpp"
#include "gvnn/io.hpp"
#include "gvnn/linalg.hpp"

// Synthetic chaotic-map generators, CSV signal ingestion, sliding-window
// extraction with chronological train/val/test tagging, and per-sample
// normalization. The map equations and constants are implementation choices
// pinned to well-known chaotic regimes; everything is exposed in MapConfig
// and echoed into generator sidecars.

namespace gvnn {

// ============================================================================
// Chaotic maps
// ============================================================================

enum class MapKind : int { CoupledLorenz, Hopfield, MacArthur };

inline const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::CoupledLorenz: return "lorenz";
        case MapKind::Hopfield: return "hopfield";
        case MapKind::MacArthur: return "macarthur";
    }
    return "?";
}

inline MapKind map_kind_from_name(const std::string& name) {
    if (name == "lorenz") return MapKind::CoupledLorenz;
    if (name == "hopfield") return MapKind::Hopfield;
    if (name == "macarthur") return MapKind::MacArthur;
    throw ConfigError("unknown map kind: " + name);
}

struct MapConfig {
    MapKind kind = MapKind::Hopfield;
    std::size_t node_count = 24;
    std::size_t length = 2000;
    std::uint64_t seed = 124;

    // Coupled Lorenz: K = node_count/3 oscillators (sigma, rho, beta), ring
    // diffusive coupling on the x components, RK4 at dt, one recorded sample
    // every `subsample` steps after `transient` integration steps.
    double lorenz_sigma = 10.0;
    double lorenz_rho = 28.0;
    double lorenz_beta = 8.0 / 3.0;
    double coupling = 0.1;
    double dt = 0.01;
    std::size_t subsample = 5;
    std::size_t transient = 1000;

    // Hopfield: x <- tanh(gain * Wh * x), Wh ~ N(0, 1/sqrt(N)), 500-step
    // transient. The largest Lyapunov exponent of this map is only reliably
    // positive for wide enough nets and strong enough gain; (N=24, gain=4)
    // measures chaotic across seeds, smaller nets mostly settle into stable
    // cycles whatever the gain.
    double gain = 4.0;
    std::size_t hopfield_transient = 500;

    // MacArthur: discrete competition x_i <- x_i exp(r_i (1 - sum_j A_ij x_j))
    // with growth rates in [r_lo, r_hi], unit self-competition, off-diagonal
    // competition in [0, comp_hi], states clamped into [state_floor, state_cap].
    double r_lo = 2.5;
    double r_hi = 3.5;
    double comp_hi = 0.3;
    double state_floor = 1e-9;
    double state_cap = 10.0;
    std::size_t macarthur_transient = 500;

    static MapConfig defaults(MapKind kind) {
        MapConfig c;
        c.kind = kind;
        switch (kind) {
            case MapKind::CoupledLorenz: c.node_count = 9; break;
            case MapKind::Hopfield: c.node_count = 24; break;
            case MapKind::MacArthur: c.node_count = 8; break;
        }
        return c;
    }
};

constexpr double kDivergenceCap = 1e6;

/// Ring of Lorenz oscillators with diffusive coupling on the x components.
/// Channels are laid out per oscillator as (x_k, y_k, z_k).
inline MultivariateSignal simulate_coupled_lorenz(const MapConfig& cfg) {
    const std::size_t n = cfg.node_count;
    if (n % 3 != 0 || n == 0) {
        throw ConfigError("coupled Lorenz needs a node count divisible by 3");
    }
    const std::size_t k_sys = n / 3;
    Rng rng(cfg.seed);
    std::vector<double> x(k_sys), y(k_sys), z(k_sys);
    for (std::size_t k = 0; k < k_sys; ++k) {
        x[k] = rng.uniform(-15.0, 15.0);
        y[k] = rng.uniform(-15.0, 15.0);
        z[k] = rng.uniform(10.0, 40.0);
    }

    std::vector<double> dx(k_sys), dy(k_sys), dz(k_sys);
    const auto derivs = [&](const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::vector<double>& zs) {
        for (std::size_t k = 0; k < k_sys; ++k) {
            const std::size_t prev = (k + k_sys - 1) % k_sys;
            const std::size_t next = (k + 1) % k_sys;
            const double diffusion =
                k_sys > 1 ? cfg.coupling * (xs[prev] - 2.0 * xs[k] + xs[next]) : 0.0;
            dx[k] = cfg.lorenz_sigma * (ys[k] - xs[k]) + diffusion;
            dy[k] = xs[k] * (cfg.lorenz_rho - zs[k]) - ys[k];
            dz[k] = xs[k] * ys[k] - cfg.lorenz_beta * zs[k];
        }
    };

    std::vector<double> k1x(k_sys), k1y(k_sys), k1z(k_sys), k2x(k_sys), k2y(k_sys), k2z(k_sys),
        k3x(k_sys), k3y(k_sys), k3z(k_sys), k4x(k_sys), k4y(k_sys), k4z(k_sys), tx(k_sys),
        ty(k_sys), tz(k_sys);
    const auto rk4_step = [&]() {
        derivs(x, y, z);
        k1x = dx; k1y = dy; k1z = dz;
        for (std::size_t k = 0; k < k_sys; ++k) {
            tx[k] = x[k] + 0.5 * cfg.dt * k1x[k];
            ty[k] = y[k] + 0.5 * cfg.dt * k1y[k];
            tz[k] = z[k] + 0.5 * cfg.dt * k1z[k];
        }
        derivs(tx, ty, tz);
        k2x = dx; k2y = dy; k2z = dz;
        for (std::size_t k = 0; k < k_sys; ++k) {
            tx[k] = x[k] + 0.5 * cfg.dt * k2x[k];
            ty[k] = y[k] + 0.5 * cfg.dt * k2y[k];
            tz[k] = z[k] + 0.5 * cfg.dt * k2z[k];
        }
        derivs(tx, ty, tz);
        k3x = dx; k3y = dy; k3z = dz;
        for (std::size_t k = 0; k < k_sys; ++k) {
            tx[k] = x[k] + cfg.dt * k3x[k];
            ty[k] = y[k] + cfg.dt * k3y[k];
            tz[k] = z[k] + cfg.dt * k3z[k];
        }
        derivs(tx, ty, tz);
        k4x = dx; k4y = dy; k4z = dz;
        for (std::size_t k = 0; k < k_sys; ++k) {
            x[k] += cfg.dt / 6.0 * (k1x[k] + 2.0 * k2x[k] + 2.0 * k3x[k] + k4x[k]);
            y[k] += cfg.dt / 6.0 * (k1y[k] + 2.0 * k2y[k] + 2.0 * k3y[k] + k4y[k]);
            z[k] += cfg.dt / 6.0 * (k1z[k] + 2.0 * k2z[k] + 2.0 * k3z[k] + k4z[k]);
            if (std::fabs(x[k]) > kDivergenceCap || std::fabs(y[k]) > kDivergenceCap ||
                std::fabs(z[k]) > kDivergenceCap) {
                throw DivergenceError("coupled Lorenz trajectory diverged");
            }
        }
    };

    for (std::size_t s = 0; s < cfg.transient; ++s) rk4_step();
    Matrix out(n, cfg.length);
    for (std::size_t t = 0; t < cfg.length; ++t) {
        for (std::size_t k = 0; k < k_sys; ++k) {
            out(3 * k + 0, t) = x[k];
            out(3 * k + 1, t) = y[k];
            out(3 * k + 2, t) = z[k];
        }
        if (t + 1 < cfg.length)
            for (std::size_t s = 0; s < cfg.subsample; ++s) rk4_step();
    }
    return MultivariateSignal(std::move(out));
}

/// Frustrated random coupling of the Hopfield map, reproducible from the
/// config seed. Exposed separately so divergence probes can drive the map
/// from arbitrary states.
inline Matrix hopfield_coupling(const MapConfig& cfg) {
    const std::size_t n = cfg.node_count;
    if (n < 2) throw ConfigError("hopfield needs at least 2 nodes");
    Rng rng(cfg.seed);
    Matrix wh(n, n);
    const double scl = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < wh.size(); ++i) wh.data()[i] = scl * rng.normal();
    return wh;
}

inline std::vector<double> hopfield_step(const Matrix& wh, std::span<const double> state,
                                         double gain) {
    std::vector<double> next = matvec(wh, state);
    for (auto& v : next) v = std::tanh(gain * v);
    return next;
}

/// Discrete-time Hopfield network with random frustrated connectivity in the
/// chaotic-gain regime. States stay in (-1, 1) by construction.
inline MultivariateSignal simulate_hopfield(const MapConfig& cfg) {
    const std::size_t n = cfg.node_count;
    const Matrix wh = hopfield_coupling(cfg);
    Rng rng(Rng::derive(cfg.seed, "hopfield-init"));
    std::vector<double> state(n);
    for (auto& v : state) v = rng.uniform(-1.0, 1.0);

    for (std::size_t s = 0; s < cfg.hopfield_transient; ++s)
        state = hopfield_step(wh, state, cfg.gain);
    Matrix out(n, cfg.length);
    for (std::size_t t = 0; t < cfg.length; ++t) {
        for (std::size_t i = 0; i < n; ++i) out(i, t) = state[i];
        if (t + 1 < cfg.length) state = hopfield_step(wh, state, cfg.gain);
    }
    return MultivariateSignal(std::move(out));
}

/// Discrete Lotka-Volterra competition for shared resources; chaotic
/// multi-species population fluctuations under the clamped exponential map.
inline MultivariateSignal simulate_macarthur(const MapConfig& cfg) {
    const std::size_t n = cfg.node_count;
    if (n < 2) throw ConfigError("macarthur needs at least 2 nodes");
    Rng rng(cfg.seed);
    std::vector<double> r(n);
    for (auto& v : r) v = rng.uniform(cfg.r_lo, cfg.r_hi);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = i == j ? 1.0 : rng.uniform(0.0, cfg.comp_hi);
    }
    std::vector<double> state(n);
    for (auto& v : state) v = rng.uniform(0.1, 1.0);

    const auto step = [&]() {
        const std::vector<double> load = matvec(a, state);
        for (std::size_t i = 0; i < n; ++i) {
            const double next = state[i] * std::exp(r[i] * (1.0 - load[i]));
            state[i] = std::clamp(next, cfg.state_floor, cfg.state_cap);
        }
    };
    for (std::size_t s = 0; s < cfg.macarthur_transient; ++s) step();
    Matrix out(n, cfg.length);
    for (std::size_t t = 0; t < cfg.length; ++t) {
        for (std::size_t i = 0; i < n; ++i) out(i, t) = state[i];
        if (t + 1 < cfg.length) step();
    }
    return MultivariateSignal(std::move(out));
}

inline MultivariateSignal simulate(const MapConfig& cfg) {
    if (cfg.length < 1) throw ConfigError("map length must be positive");
    switch (cfg.kind) {
        case MapKind::CoupledLorenz: return simulate_coupled_lorenz(cfg);
        case MapKind::Hopfield: return simulate_hopfield(cfg);
        case MapKind::MacArthur: return simulate_macarthur(cfg);
    }
    throw ConfigError("unknown map kind");
}

// ============================================================================
// CSV ingestion
// ============================================================================

/// rows = nodes, columns = time by default; transpose flips the orientation.
inline MultivariateSignal load_csv_signal(const std::string& path, bool transpose_flag = false) {
    Matrix m = load_csv_matrix(path);
    if (transpose_flag) m = transpose(m);
    return MultivariateSignal(std::move(m));
}

inline void write_csv_signal(const std::string& path, const MultivariateSignal& sig,
                             const std::vector<std::string>& header_comments = {}) {
    write_csv_matrix(path, sig.values, header_comments);
}

// ============================================================================
// Windowing
// ============================================================================

enum class Split : int { Train, Val, Test };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

/// Sliding windows: item k covers raw columns [k*stride, k*stride + T_w) and
/// its target is the raw column k*stride + T_w - 1 + H. Tags are
/// chronological and disjoint: the last 20% of windows are test; of the rest
/// the last 20% are validation.
struct WindowedDataset {
    std::vector<Matrix> inputs;                // raw N x T_w windows
    std::vector<std::vector<double>> targets;  // raw target columns
    std::vector<Split> split;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::size_t stride = 1;

    std::size_t size() const { return inputs.size(); }

    std::vector<std::size_t> indices(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(i);
        return out;
    }
};

inline WindowedDataset make_windows(const MultivariateSignal& sig, std::size_t t_w,
                                    std::size_t horizon, std::size_t stride = 1) {
    if (t_w == 0 || horizon == 0 || stride == 0) {
        throw ConfigError("window, horizon and stride must be positive");
    }
    const std::size_t t_total = sig.length();
    if (t_total < t_w + horizon) {
        throw TooShortError("signal length " + std::to_string(t_total) +
                            " < window + horizon = " + std::to_string(t_w + horizon));
    }
    const std::size_t count = (t_total - t_w - horizon) / stride + 1;

    WindowedDataset ds;
    ds.window = t_w;
    ds.horizon = horizon;
    ds.stride = stride;
    ds.inputs.reserve(count);
    ds.targets.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t start = k * stride;
        Matrix win(sig.node_count(), t_w);
        for (std::size_t i = 0; i < sig.node_count(); ++i)
            for (std::size_t t = 0; t < t_w; ++t) win(i, t) = sig.values(i, start + t);
        ds.inputs.push_back(std::move(win));
        ds.targets.push_back(sig.values.col(start + t_w - 1 + horizon));
    }

    const std::size_t n_test = count / 5;
    const std::size_t rest = count - n_test;
    const std::size_t n_val = rest / 5;
    const std::size_t n_train = rest - n_val;
    ds.split.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        ds.split[k] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
    }
    return ds;
}

/// Per-sample normalization: z-score each time column across channels
/// (epsilon-guarded); identical to the in-layer zave transform.
inline Matrix zscore_per_sample(const Matrix& window) { return zscore_columns(window); }

}  // namespace gvnn
