#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gvnn/error.hpp"
#include "gvnn/linalg.hpp"

// Graph-variate machinery: instantaneous connectivity profiles J(t), stable
// supports W with trainable parameterizations, the masked tensor
// Omega(t) = W o J(t), slice-wise symmetric renormalization, and the naive
// Kronecker-expansion oracle used for equivalence checks and benchmarks.

namespace gvnn {

constexpr double kZscoreEps = 1e-5;
constexpr double kRenormEps = 1e-5;

// ============================================================================
// Signals
// ============================================================================

/// N-node, T-sample real signal. Row i is node i's time series; column t is
/// the graph signal x(t).
struct MultivariateSignal {
    Matrix values;  // N x T

    MultivariateSignal() = default;
    explicit MultivariateSignal(Matrix m) : values(std::move(m)) {
        if (values.rows() < 2 || values.cols() < 1) {
            throw DimMismatchError("signal needs N >= 2 nodes and T >= 1 samples, got " +
                                   std::to_string(values.rows()) + "x" +
                                   std::to_string(values.cols()));
        }
        if (!values.all_finite()) throw NonFiniteError("signal contains non-finite values");
    }

    std::size_t node_count() const { return values.rows(); }
    std::size_t length() const { return values.cols(); }
};

struct ZscoreStats {
    std::vector<double> mean;  // per time column, across nodes
    std::vector<double> sd;    // unbiased, before the eps shift
};

/// Z-score each column across rows: (x - mean) / (sd + eps) with the unbiased
/// standard deviation. Constant columns map to zero.
inline Matrix zscore_columns(const Matrix& x, double eps = kZscoreEps,
                             ZscoreStats* stats = nullptr) {
    const std::size_t n = x.rows();
    const std::size_t t_len = x.cols();
    Matrix out(n, t_len);
    if (stats) {
        stats->mean.assign(t_len, 0.0);
        stats->sd.assign(t_len, 0.0);
    }
    for (std::size_t t = 0; t < t_len; ++t) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += x(i, t);
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x(i, t) - mu;
            var += d * d;
        }
        var /= static_cast<double>(n > 1 ? n - 1 : 1);
        const double sd = std::sqrt(var);
        const double denom = sd + eps;
        for (std::size_t i = 0; i < n; ++i) out(i, t) = (x(i, t) - mu) / denom;
        if (stats) {
            stats->mean[t] = mu;
            stats->sd[t] = sd;
        }
    }
    return out;
}

/// Per-row mean over the window (the temporal mean used by the IC node
/// function).
inline std::vector<double> row_means(const Matrix& x) {
    std::vector<double> mu(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < x.cols(); ++t) acc += x(i, t);
        mu[i] = acc / static_cast<double>(x.cols());
    }
    return mu;
}

// ============================================================================
// Node functions
// ============================================================================

enum class NodeFunctionType : std::uint8_t { IC, LDE, Combo };

/// Bivariate edge function applied per time sample. Combo evaluates
/// alpha*IC + beta*LDE entrywise; keep_diagonal applies to the IC part only
/// (LDE has a structurally zero diagonal).
struct NodeFunctionKind {
    NodeFunctionType type = NodeFunctionType::LDE;
    double alpha = 1.0;
    double beta = 1.0;
    bool keep_diagonal = true;

    static NodeFunctionKind lde() { return {NodeFunctionType::LDE, 0.0, 1.0, true}; }
    static NodeFunctionKind ic(bool keep_diag = true) {
        return {NodeFunctionType::IC, 1.0, 0.0, keep_diag};
    }
    static NodeFunctionKind combo(double alpha, double beta, bool keep_diag = true) {
        return {NodeFunctionType::Combo, alpha, beta, keep_diag};
    }

    bool uses_ic() const { return type != NodeFunctionType::LDE; }
    bool uses_lde() const { return type != NodeFunctionType::IC; }
    double ic_weight() const { return type == NodeFunctionType::IC ? 1.0 : alpha; }
    double lde_weight() const { return type == NodeFunctionType::LDE ? 1.0 : beta; }

    std::string name() const {
        switch (type) {
            case NodeFunctionType::IC: return keep_diagonal ? "ic" : "ic-nodiag";
            case NodeFunctionType::LDE: return "lde";
            case NodeFunctionType::Combo: return "combo";
        }
        return "?";
    }
};

/// J_ij = (x_i - x_j)^2 with a zero diagonal. Rank <= 3: equals
/// u 1^T - 2 v v^T + 1 u^T for u = x o x, v = x.
inline Matrix node_function_lde(std::span<const double> x) {
    const std::size_t n = x.size();
    Matrix j(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = x[a] - x[b];
            j(a, b) = d * d;
            j(b, a) = d * d;
        }
    }
    return j;
}

/// J_ij = |(x_i - mean_i)(x_j - mean_j)|; the diagonal is zeroed iff
/// keep_diagonal is false. With the diagonal kept this is the rank-1 matrix
/// |d||d|^T.
inline Matrix node_function_ic(std::span<const double> x, std::span<const double> temporal_mean,
                               bool keep_diagonal) {
    const std::size_t n = x.size();
    if (temporal_mean.size() != n) {
        throw DimMismatchError("node_function_ic: mean length mismatch");
    }
    std::vector<double> ad(n);
    for (std::size_t i = 0; i < n; ++i) ad[i] = std::fabs(x[i] - temporal_mean[i]);
    Matrix j(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) j(a, b) = ad[a] * ad[b];
    if (!keep_diagonal)
        for (std::size_t a = 0; a < n; ++a) j(a, a) = 0.0;
    return j;
}

/// Evaluate the chosen node function for one time column.
inline Matrix node_function_eval(const NodeFunctionKind& kind, std::span<const double> x,
                                 std::span<const double> temporal_mean) {
    switch (kind.type) {
        case NodeFunctionType::LDE: return node_function_lde(x);
        case NodeFunctionType::IC: return node_function_ic(x, temporal_mean, kind.keep_diagonal);
        case NodeFunctionType::Combo: {
            Matrix j = scale(node_function_ic(x, temporal_mean, kind.keep_diagonal), kind.alpha);
            const Matrix l = node_function_lde(x);
            for (std::size_t i = 0; i < j.size(); ++i) j.data()[i] += kind.beta * l.data()[i];
            return j;
        }
    }
    throw ConfigError("node_function_eval: unknown kind");
}

// ============================================================================
// Stable supports
// ============================================================================

enum class SupportParam : std::uint8_t { Fixed, DenseTrainable, AdditiveLowRank, HadamardLowRank };

inline const char* support_param_name(SupportParam p) {
    switch (p) {
        case SupportParam::Fixed: return "fixed";
        case SupportParam::DenseTrainable: return "dense";
        case SupportParam::AdditiveLowRank: return "lora";
        case SupportParam::HadamardLowRank: return "hira";
    }
    return "?";
}

/// Stable N x N support W. Fixed supports pass base through untouched;
/// trainable parameterizations are symmetrized after composition so every
/// spectral guarantee downstream stays valid:
///   DenseTrainable:   sym(base)
///   AdditiveLowRank:  sym(base + A B)
///   HadamardLowRank:  sym(base o (A B))
struct SupportMatrix {
    Matrix base;  // N x N
    SupportParam param = SupportParam::Fixed;
    Matrix factor_a;  // N x r (low-rank modes only)
    Matrix factor_b;  // r x N

    SupportMatrix() = default;

    static std::size_t default_rank(std::size_t n) { return std::max<std::size_t>(1, n / 8); }

    static SupportMatrix fixed(Matrix w) {
        SupportMatrix s;
        s.base = std::move(w);
        s.param = SupportParam::Fixed;
        s.validate();
        return s;
    }

    static SupportMatrix dense_trainable(Matrix w) {
        SupportMatrix s;
        s.base = std::move(w);
        s.param = SupportParam::DenseTrainable;
        s.validate();
        return s;
    }

    /// LoRA-style W = sym(base + A B). A starts as small noise and B at zero,
    /// so the support equals sym(base) until training moves B.
    static SupportMatrix additive_low_rank(Matrix base, std::size_t rank, Rng& rng) {
        SupportMatrix s;
        const std::size_t n = base.rows();
        s.base = std::move(base);
        s.param = SupportParam::AdditiveLowRank;
        s.factor_a = Matrix(n, rank);
        for (std::size_t i = 0; i < s.factor_a.size(); ++i)
            s.factor_a.data()[i] = 0.01 * rng.normal();
        s.factor_b = Matrix(rank, n);
        s.validate();
        return s;
    }

    /// HiRA-style W = sym(base o (A B)). Factors start near A B = all-ones so
    /// the initial support equals sym(base) up to the injected symmetry-breaking
    /// noise.
    static SupportMatrix hadamard_low_rank(Matrix base, std::size_t rank, Rng& rng) {
        SupportMatrix s;
        const std::size_t n = base.rows();
        s.base = std::move(base);
        s.param = SupportParam::HadamardLowRank;
        s.factor_a = Matrix(n, rank);
        const double inv_r = 1.0 / static_cast<double>(rank);
        for (std::size_t i = 0; i < s.factor_a.size(); ++i)
            s.factor_a.data()[i] = inv_r * (1.0 + 0.01 * rng.normal());
        s.factor_b = Matrix(rank, n, 1.0);
        s.validate();
        return s;
    }

    std::size_t dim() const { return base.rows(); }
    std::size_t rank() const { return factor_a.cols(); }

    bool trainable() const { return param != SupportParam::Fixed; }

    void validate() const {
        if (base.rows() != base.cols()) throw NotSquareError(base.rows(), base.cols());
        if (param == SupportParam::AdditiveLowRank || param == SupportParam::HadamardLowRank) {
            if (factor_a.rows() != base.rows() || factor_b.cols() != base.cols() ||
                factor_a.cols() != factor_b.rows() || factor_a.cols() == 0) {
                throw ShapeMismatchError("support low-rank factors have inconsistent shapes");
            }
        }
    }

    Matrix effective() const {
        switch (param) {
            case SupportParam::Fixed: return base;
            case SupportParam::DenseTrainable: return symmetrize(base);
            case SupportParam::AdditiveLowRank:
                return symmetrize(add(base, matmul(factor_a, factor_b)));
            case SupportParam::HadamardLowRank:
                return symmetrize(hadamard(base, matmul(factor_a, factor_b)));
        }
        throw ConfigError("SupportMatrix: unknown parameterization");
    }
};

/// Long-term channelwise Pearson correlation of the signal rows; the usual
/// initialization of the stable support. Diagonal is exactly 1; entries are
/// clamped into [-1, 1] (or [0, 1] with absolute=true).
inline SupportMatrix build_support_correlation(const MultivariateSignal& sig, bool absolute) {
    const Matrix& x = sig.values;
    const std::size_t n = x.rows();
    const std::size_t t_len = x.cols();
    if (t_len < 2) throw TooShortError("correlation support needs T >= 2");

    std::vector<double> mu = row_means(x);
    std::vector<double> denom(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double lo = x(i, 0), hi = x(i, 0);
        double acc = 0.0;
        for (std::size_t t = 0; t < t_len; ++t) {
            lo = std::min(lo, x(i, t));
            hi = std::max(hi, x(i, t));
            const double d = x(i, t) - mu[i];
            acc += d * d;
        }
        if (lo == hi || acc == 0.0) throw ZeroVarianceError(i);
        denom[i] = std::sqrt(acc);
    }

    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        w(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < t_len; ++t)
                acc += (x(i, t) - mu[i]) * (x(j, t) - mu[j]);
            double r = acc / (denom[i] * denom[j]);
            r = std::clamp(r, -1.0, 1.0);
            if (absolute) r = std::fabs(r);
            w(i, j) = r;
            w(j, i) = r;
        }
    }
    return SupportMatrix::fixed(std::move(w));
}

// ============================================================================
// Dynamic renormalization
// ============================================================================

/// Symmetric renormalization of one slice: with A' = slice + I and
/// deg_i = sum_j A'_ij, returns diag(max(deg,eps))^{-1/2} A'
/// diag(max(deg,eps))^{-1/2}. Negative or tiny degrees clamp to eps.
inline Matrix renormalize_dynamic(const Matrix& slice, double eps = kRenormEps,
                                  std::vector<double>* degrees_out = nullptr) {
    if (slice.rows() != slice.cols()) throw NotSquareError(slice.rows(), slice.cols());
    const std::size_t n = slice.rows();
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 1.0;  // the +I contribution
        for (std::size_t j = 0; j < n; ++j) acc += slice(i, j);
        deg[i] = acc;
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(std::max(deg[i], eps));
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = slice(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = inv_sqrt[i] * aij * inv_sqrt[j];
        }
    if (degrees_out) *degrees_out = std::move(deg);
    return out;
}

// ============================================================================
// Graph-variate tensor
// ============================================================================

/// The stack {Omega(t)} over t: per-time instantaneous connectivity masked by
/// the stable support, optionally renormalized slice-wise.
struct GraphVariateTensor {
    Tensor3 slices;  // (T, N, N)
    bool renormalized = false;
    NodeFunctionKind source_kind;

    std::size_t length() const { return slices.dim0(); }
    std::size_t node_count() const { return slices.dim1(); }
};

/// Build Omega(t) = W o J(t) for every t. With zave the signal is first
/// z-scored across nodes per time sample; with renormalize each masked slice
/// passes through renormalize_dynamic. The IC temporal mean is taken over
/// this window of the (possibly z-scored) signal.
inline GraphVariateTensor graph_variate_tensor(const MultivariateSignal& sig,
                                               const SupportMatrix& support,
                                               const NodeFunctionKind& kind, bool renormalize,
                                               bool zave) {
    const std::size_t n = sig.node_count();
    const std::size_t t_len = sig.length();
    if (support.dim() != n) {
        throw DimMismatchError("graph_variate_tensor: support dim " +
                               std::to_string(support.dim()) + " != node count " +
                               std::to_string(n));
    }
    const Matrix w = support.effective();
    const Matrix x = zave ? zscore_columns(sig.values) : sig.values;
    const std::vector<double> mu = kind.uses_ic() ? row_means(x) : std::vector<double>(n, 0.0);

    GraphVariateTensor gvt;
    gvt.slices = Tensor3(t_len, n, n);
    gvt.renormalized = renormalize;
    gvt.source_kind = kind;
    std::vector<double> xt(n);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < n; ++i) xt[i] = x(i, t);
        Matrix slice = hadamard(w, node_function_eval(kind, xt, mu));
        if (renormalize) slice = renormalize_dynamic(slice);
        gvt.slices.set_slice(t, slice);
    }
    return gvt;
}

// ============================================================================
// Naive Kronecker oracle
// ============================================================================

constexpr std::size_t kKronDefaultCap = 8192;

/// Materializes the full (NT) x (NT) spatio-temporal kernel whose (t, t')
/// block is (L_T)_{t,t'} * Omega(t'), applies it to vec(X) (time-major
/// stacking of the columns), and reshapes back to N x T. Deliberately
/// O(N^2 T^2) in time and memory: this is the equivalence and benchmark
/// oracle, not a fast path. With L_T = I it must agree with the batched
/// per-time mat-vec.
inline Matrix kron_apply_naive(const MultivariateSignal& sig, const SupportMatrix& support,
                               const NodeFunctionKind& kind, const Matrix& l_t,
                               std::size_t cap = kKronDefaultCap) {
    const std::size_t n = sig.node_count();
    const std::size_t t_len = sig.length();
    if (l_t.rows() != t_len || l_t.cols() != t_len) {
        throw DimMismatchError("kron_apply_naive: L_T must be " + std::to_string(t_len) + "x" +
                               std::to_string(t_len));
    }
    const std::size_t nt = n * t_len;
    if (nt > cap) {
        throw MemoryBudgetError("kron_apply_naive: N*T = " + std::to_string(nt) +
                                " exceeds cap " + std::to_string(cap));
    }

    const GraphVariateTensor gvt =
        graph_variate_tensor(sig, support, kind, /*renormalize=*/false, /*zave=*/false);

    Matrix kernel(nt, nt);
    for (std::size_t tr = 0; tr < t_len; ++tr) {
        for (std::size_t tc = 0; tc < t_len; ++tc) {
            const double coeff = l_t(tr, tc);
            if (coeff == 0.0) continue;
            const double* omega = gvt.slices.data() + tc * n * n;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    kernel(tr * n + i, tc * n + j) = coeff * omega[i * n + j];
        }
    }

    std::vector<double> vec_x(nt);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t i = 0; i < n; ++i) vec_x[t * n + i] = sig.values(i, t);

    const std::vector<double> vec_y = matvec(kernel, vec_x);

    Matrix out(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t i = 0; i < n; ++i) out(i, t) = vec_y[t * n + i];
    return out;
}

}  // namespace gvnn
