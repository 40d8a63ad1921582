#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gvnn/error.hpp"
#include "gvnn/gvsa.hpp"
#include "gvnn/linalg.hpp"

// The graph-variate layer: X -> sigma((X D_a + (Omega * X) D_b) Theta) with
// Omega built from the layer input itself, plus hand-derived reverse-mode
// gradients through every construction step (node function, Hadamard mask,
// low-rank support factors, slice renormalization, per-sample z-scoring).
// The gradients are exact up to the stated subgradient choices at the |.|,
// clamp, and LeakyReLU kinks; unit tests pin them against central finite
// differences.

namespace gvnn {

/// Subgradient of |u|: sign(u) with sign(0) := 0.
inline double ic_abs_subgradient(double u) {
    if (u > 0.0) return 1.0;
    if (u < 0.0) return -1.0;
    return 0.0;
}

inline double leaky_relu(double v, double slope) { return v >= 0.0 ? v : slope * v; }
inline double leaky_relu_grad(double v, double slope) { return v >= 0.0 ? 1.0 : slope; }

// ============================================================================
// Layer parameters
// ============================================================================

struct GvnnLayerParams {
    std::vector<double> a;  // T, per-time identity tap
    std::vector<double> b;  // T, per-time graph tap
    Matrix theta;           // T x T time-mixing block
    SupportMatrix support;
    NodeFunctionKind kind;
    bool renormalize = true;
    bool zave = true;
    double leaky_slope = 0.01;

    std::size_t time_len() const { return a.size(); }
    std::size_t node_count() const { return support.dim(); }

    /// a = 1, b = 0.1, Theta = I + 0.01 * noise: the layer starts near an
    /// identity map so early training is stable.
    static GvnnLayerParams init(std::size_t t_len, SupportMatrix support, NodeFunctionKind kind,
                                bool renormalize, bool zave, Rng& rng) {
        GvnnLayerParams p;
        p.a.assign(t_len, 1.0);
        p.b.assign(t_len, 0.1);
        p.theta = Matrix::identity(t_len);
        for (std::size_t i = 0; i < p.theta.size(); ++i) p.theta.data()[i] += 0.01 * rng.normal();
        p.support = std::move(support);
        p.kind = kind;
        p.renormalize = renormalize;
        p.zave = zave;
        return p;
    }

    bool all_finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        for (double v : b)
            if (!std::isfinite(v)) return false;
        if (!theta.all_finite() || !support.base.all_finite()) return false;
        if (support.factor_a.size() && !support.factor_a.all_finite()) return false;
        if (support.factor_b.size() && !support.factor_b.all_finite()) return false;
        return true;
    }
};

// ============================================================================
// Forward
// ============================================================================

/// Every intermediate the backward pass needs, captured at forward time.
struct GvnnLayerCache {
    // configuration snapshot
    NodeFunctionKind kind;
    bool renormalize = false;
    bool zave = false;
    double leaky_slope = 0.01;
    std::vector<double> a, b;
    Matrix theta;
    Matrix w_eff;
    SupportParam support_param = SupportParam::Fixed;
    Matrix support_base;      // low-rank modes (Hadamard backward needs the base)
    Matrix support_factor_a;  // low-rank modes only
    Matrix support_factor_b;

    Matrix x;    // layer input
    Matrix xp;   // input after optional z-scoring
    ZscoreStats zstats;
    std::vector<double> mu;  // row means of xp (IC only)
    Tensor3 j;               // node-function slices
    Tensor3 omega_raw;       // masked slices before renormalization
    Matrix deg;              // N x T degrees (renormalize only)
    Tensor3 omega;           // final slices
    Matrix conv;             // batched_matvec(omega, xp)
    Matrix z;                // xp D_a + conv D_b
    Matrix pre;              // z * theta

    std::size_t node_count() const { return x.rows(); }
    std::size_t time_len() const { return x.cols(); }
};

inline Matrix gvnn_forward(const Matrix& x, const GvnnLayerParams& params,
                           GvnnLayerCache* cache = nullptr) {
    const std::size_t n = x.rows();
    const std::size_t t_len = x.cols();
    if (params.a.size() != t_len || params.b.size() != t_len || params.theta.rows() != t_len ||
        params.theta.cols() != t_len) {
        throw DimMismatchError("gvnn_forward: params sized for T=" +
                               std::to_string(params.a.size()) + ", input has T=" +
                               std::to_string(t_len));
    }
    if (params.support.dim() != n) {
        throw DimMismatchError("gvnn_forward: support dim " + std::to_string(params.support.dim()) +
                               " != node count " + std::to_string(n));
    }

    GvnnLayerCache local;
    GvnnLayerCache& c = cache ? *cache : local;
    c.kind = params.kind;
    c.renormalize = params.renormalize;
    c.zave = params.zave;
    c.leaky_slope = params.leaky_slope;
    c.a = params.a;
    c.b = params.b;
    c.theta = params.theta;
    c.support_param = params.support.param;
    if (params.support.param == SupportParam::AdditiveLowRank ||
        params.support.param == SupportParam::HadamardLowRank) {
        c.support_base = params.support.base;
        c.support_factor_a = params.support.factor_a;
        c.support_factor_b = params.support.factor_b;
    }
    c.x = x;

    c.xp = params.zave ? zscore_columns(x, kZscoreEps, &c.zstats) : x;
    c.w_eff = params.support.effective();
    c.mu = params.kind.uses_ic() ? row_means(c.xp) : std::vector<double>(n, 0.0);

    c.j = Tensor3(t_len, n, n);
    c.omega = Tensor3(t_len, n, n);
    if (params.renormalize) {
        c.omega_raw = Tensor3(t_len, n, n);
        c.deg = Matrix(n, t_len);
    }
    std::vector<double> xt(n);
    std::vector<double> deg_t;
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < n; ++i) xt[i] = c.xp(i, t);
        Matrix jt = node_function_eval(params.kind, xt, c.mu);
        Matrix masked = hadamard(c.w_eff, jt);
        c.j.set_slice(t, jt);
        if (params.renormalize) {
            c.omega_raw.set_slice(t, masked);
            Matrix renormed = renormalize_dynamic(masked, kRenormEps, &deg_t);
            for (std::size_t i = 0; i < n; ++i) c.deg(i, t) = deg_t[i];
            c.omega.set_slice(t, renormed);
        } else {
            c.omega.set_slice(t, masked);
        }
    }

    c.conv = batched_matvec(c.omega, c.xp);

    c.z = Matrix(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t i = 0; i < n; ++i)
            c.z(i, t) = params.a[t] * c.xp(i, t) + params.b[t] * c.conv(i, t);

    c.pre = matmul(c.z, params.theta);

    Matrix y(n, t_len);
    for (std::size_t i = 0; i < y.size(); ++i)
        y.data()[i] = leaky_relu(c.pre.data()[i], params.leaky_slope);

    if (!y.all_finite() || !c.conv.all_finite()) {
        throw NonFiniteError("gvnn_forward: non-finite intermediate (exploding parameters?)");
    }
    return y;
}

// ============================================================================
// Backward
// ============================================================================

struct GvnnLayerGrads {
    std::vector<double> d_a;
    std::vector<double> d_b;
    Matrix d_theta;
    Matrix d_support_base;  // DenseTrainable only
    Matrix d_factor_a;      // low-rank modes only
    Matrix d_factor_b;
    Matrix d_input;

    void accumulate(const GvnnLayerGrads& o) {
        for (std::size_t i = 0; i < d_a.size(); ++i) d_a[i] += o.d_a[i];
        for (std::size_t i = 0; i < d_b.size(); ++i) d_b[i] += o.d_b[i];
        for (std::size_t i = 0; i < d_theta.size(); ++i) d_theta.data()[i] += o.d_theta.data()[i];
        for (std::size_t i = 0; i < d_support_base.size(); ++i)
            d_support_base.data()[i] += o.d_support_base.data()[i];
        for (std::size_t i = 0; i < d_factor_a.size(); ++i)
            d_factor_a.data()[i] += o.d_factor_a.data()[i];
        for (std::size_t i = 0; i < d_factor_b.size(); ++i)
            d_factor_b.data()[i] += o.d_factor_b.data()[i];
    }

    bool all_finite() const {
        for (double v : d_a)
            if (!std::isfinite(v)) return false;
        for (double v : d_b)
            if (!std::isfinite(v)) return false;
        return d_theta.all_finite() && d_support_base.all_finite() && d_factor_a.all_finite() &&
               d_factor_b.all_finite() && d_input.all_finite();
    }
};

namespace detail {

/// Reverse renormalize_dynamic for one slice. grad is d(out); raw the
/// pre-renormalization slice; deg the forward-computed degrees (including
/// the +I contribution). The clamp at eps passes zero gradient when active.
inline Matrix renormalize_backward(const Matrix& grad, const Matrix& raw,
                                   std::span<const double> deg, double eps = kRenormEps) {
    const std::size_t n = raw.rows();
    std::vector<double> f(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = std::max(deg[i], eps);
        f[i] = 1.0 / std::sqrt(m[i]);
    }
    Matrix d_raw(n, n);
    std::vector<double> d_f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t jx = 0; jx < n; ++jx) {
            const double aij = raw(i, jx) + (i == jx ? 1.0 : 0.0);
            const double g = grad(i, jx);
            d_raw(i, jx) = g * f[i] * f[jx];
            d_f[i] += g * aij * f[jx];
            d_f[jx] += g * f[i] * aij;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (deg[i] <= eps) continue;  // clamp active: no flow into the degree
        const double d_deg = d_f[i] * (-0.5) * f[i] / m[i];  // -1/2 m^{-3/2}
        for (std::size_t jx = 0; jx < n; ++jx) d_raw(i, jx) += d_deg;
    }
    return d_raw;
}

/// Reverse zscore_columns: g is d(xp), x the raw input, stats from forward.
inline Matrix zscore_backward(const Matrix& g, const Matrix& x, const ZscoreStats& stats,
                              double eps = kZscoreEps) {
    const std::size_t n = x.rows();
    const std::size_t t_len = x.cols();
    Matrix dx(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double mu = stats.mean[t];
        const double sd = stats.sd[t];
        const double c = sd + eps;
        double gbar = 0.0;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gbar += g(i, t);
            dot += g(i, t) * (x(i, t) - mu);
        }
        gbar /= static_cast<double>(n);
        const double sd_term =
            (sd > 0.0 && n > 1) ? dot / (c * c * static_cast<double>(n - 1) * sd) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dx(i, t) = (g(i, t) - gbar) / c - sd_term * (x(i, t) - mu);
        }
    }
    return dx;
}

}  // namespace detail

/// Exact reverse-mode gradients of gvnn_forward, including the dependence of
/// Omega on the input (through the node function and, for IC, the window
/// temporal mean) and on the support parameterization.
inline GvnnLayerGrads gvnn_backward(const GvnnLayerCache& c, const Matrix& d_y) {
    const std::size_t n = c.node_count();
    const std::size_t t_len = c.time_len();
    if (d_y.rows() != n || d_y.cols() != t_len) {
        throw CacheMismatchError("gvnn_backward: dY is " + std::to_string(d_y.rows()) + "x" +
                                 std::to_string(d_y.cols()) + ", cache holds " +
                                 std::to_string(n) + "x" + std::to_string(t_len));
    }
    if (c.omega.dim0() != t_len || c.pre.rows() != n) {
        throw CacheMismatchError("gvnn_backward: cache not produced by a matching forward");
    }

    GvnnLayerGrads g;
    g.d_a.assign(t_len, 0.0);
    g.d_b.assign(t_len, 0.0);

    // activation and time-mixing block
    Matrix d_pre(n, t_len);
    for (std::size_t i = 0; i < d_pre.size(); ++i)
        d_pre.data()[i] = d_y.data()[i] * leaky_relu_grad(c.pre.data()[i], c.leaky_slope);
    g.d_theta = matmul(transpose(c.z), d_pre);
    const Matrix d_z = matmul(d_pre, transpose(c.theta));

    // two-tap combine
    Matrix d_xp(n, t_len);
    Matrix d_conv(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dz = d_z(i, t);
            g.d_a[t] += dz * c.xp(i, t);
            g.d_b[t] += dz * c.conv(i, t);
            d_xp(i, t) = c.a[t] * dz;
            d_conv(i, t) = c.b[t] * dz;
        }
    }

    // batched mat-vec: conv(:,t) = omega(t) xp(:,t)
    Tensor3 d_omega(t_len, n, n);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* om = c.omega.data() + t * n * n;
        double* dom = d_omega.data() + t * n * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double dc = d_conv(i, t);
            for (std::size_t jx = 0; jx < n; ++jx) {
                dom[i * n + jx] = dc * c.xp(jx, t);
                d_xp(jx, t) += om[i * n + jx] * dc;
            }
        }
    }

    // optional renormalization, then the Hadamard mask
    Matrix d_w_eff(n, n);
    Tensor3 d_j(t_len, n, n);
    for (std::size_t t = 0; t < t_len; ++t) {
        Matrix d_slice = d_omega.slice(t);
        if (c.renormalize) {
            std::vector<double> deg_t(n);
            for (std::size_t i = 0; i < n; ++i) deg_t[i] = c.deg(i, t);
            d_slice = detail::renormalize_backward(d_slice, c.omega_raw.slice(t), deg_t);
        }
        const double* jt = c.j.data() + t * n * n;
        double* djt = d_j.data() + t * n * n;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t jx = 0; jx < n; ++jx) {
                const double ds = d_slice(i, jx);
                d_w_eff(i, jx) += ds * jt[i * n + jx];
                djt[i * n + jx] = ds * c.w_eff(i, jx);
            }
        }
    }

    // node function: gradients w.r.t. the (z-scored) signal
    const double lde_w = c.kind.uses_lde() ? c.kind.lde_weight() : 0.0;
    const double ic_w = c.kind.uses_ic() ? c.kind.ic_weight() : 0.0;
    Matrix d_dev;  // IC deviations d_i(t) = xp(i,t) - mu_i
    if (ic_w != 0.0) d_dev = Matrix(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* djt = d_j.data() + t * n * n;
        if (lde_w != 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t jx = 0; jx < n; ++jx) {
                    if (i == jx) continue;
                    const double gg = lde_w * djt[i * n + jx];
                    if (gg == 0.0) continue;
                    const double diff = c.xp(i, t) - c.xp(jx, t);
                    d_xp(i, t) += 2.0 * gg * diff;
                    d_xp(jx, t) -= 2.0 * gg * diff;
                }
            }
        }
        if (ic_w != 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double di = c.xp(i, t) - c.mu[i];
                for (std::size_t jx = 0; jx < n; ++jx) {
                    if (i == jx && !c.kind.keep_diagonal) continue;
                    const double dj_v = c.xp(jx, t) - c.mu[jx];
                    const double du = ic_w * djt[i * n + jx] * ic_abs_subgradient(di * dj_v);
                    if (du == 0.0) continue;
                    d_dev(i, t) += du * dj_v;
                    d_dev(jx, t) += du * di;
                }
            }
        }
    }
    if (ic_w != 0.0) {
        // d(t) = xp(t) - rowmean(xp): subtract each row's mean gradient
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t t = 0; t < t_len; ++t) acc += d_dev(i, t);
            acc /= static_cast<double>(t_len);
            for (std::size_t t = 0; t < t_len; ++t) d_xp(i, t) += d_dev(i, t) - acc;
        }
    }

    g.d_input = c.zave ? detail::zscore_backward(d_xp, c.x, c.zstats) : d_xp;

    // support parameterization: W_eff = sym(compose(...)), so the composed
    // matrix receives the symmetrized cotangent
    const Matrix s = symmetrize(d_w_eff);
    switch (c.support_param) {
        case SupportParam::Fixed:
            break;
        case SupportParam::DenseTrainable:
            g.d_support_base = s;
            break;
        case SupportParam::AdditiveLowRank:
            // W = sym(base + A B): only the factors train
            g.d_factor_a = matmul(s, transpose(c.support_factor_b));
            g.d_factor_b = matmul(transpose(c.support_factor_a), s);
            break;
        case SupportParam::HadamardLowRank: {
            // W = sym(base o (A B))
            const Matrix sm = hadamard(s, c.support_base);
            g.d_factor_a = matmul(sm, transpose(c.support_factor_b));
            g.d_factor_b = matmul(transpose(c.support_factor_a), sm);
            break;
        }
    }
    return g;
}

}  // namespace gvnn
