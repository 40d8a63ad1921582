#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gvnn/error.hpp"

// Minimal dense linear algebra kernel: row-major matrices, a contiguous
// rank-3 tensor, a cyclic-Jacobi symmetric eigensolver, eigenvalue-based
// rank estimation, and a counter-seeded deterministic RNG. Everything
// else in the library builds on this header and nothing external.

namespace gvnn {

// ============================================================================
// Matrix
// ============================================================================

/// Dense real matrix, row-major contiguous storage.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ShapeMismatchError("matrix data length " + std::to_string(data_.size()) +
                                     " does not match " + std::to_string(rows_) + "x" +
                                     std::to_string(cols_));
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_col(std::size_t j, std::span<const double> v) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---- elementwise and structural helpers ------------------------------------

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimMismatchError(std::string(op) + ": shape mismatch " +
                               std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                               " vs " + std::to_string(b.rows()) + "x" +
                               std::to_string(b.cols()));
    }
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimMismatchError("matmul: " + std::to_string(a.rows()) + "x" +
                               std::to_string(a.cols()) + " * " + std::to_string(b.rows()) +
                               "x" + std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
    return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "hadamard");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

/// (M + M^T) / 2
inline Matrix symmetrize(const Matrix& a) {
    if (a.rows() != a.cols()) throw NotSquareError(a.rows(), a.cols());
    Matrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i]));
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw DimMismatchError("matvec: " + std::to_string(a.rows()) + "x" +
                               std::to_string(a.cols()) + " * vector of length " +
                               std::to_string(x.size()));
    }
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        const double* r = a.data() + i * a.cols();
        for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// ============================================================================
// Tensor3
// ============================================================================

/// Contiguous rank-3 tensor, slowest-varying axis first. The (T, N, N)
/// layout keeps each time slice contiguous, which is the access pattern of
/// the batched graph convolution.
class Tensor3 {
public:
    Tensor3() = default;

    Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0)
        : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * d1_ + j) * d2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * d1_ + j) * d2_ + k];
    }

    std::span<double> slice_span(std::size_t i) {
        return {data_.data() + i * d1_ * d2_, d1_ * d2_};
    }
    std::span<const double> slice_span(std::size_t i) const {
        return {data_.data() + i * d1_ * d2_, d1_ * d2_};
    }

    /// Copy of slice i along the first axis as a d1 x d2 matrix.
    Matrix slice(std::size_t i) const {
        Matrix m(d1_, d2_);
        auto s = slice_span(i);
        std::copy(s.begin(), s.end(), m.data());
        return m;
    }

    void set_slice(std::size_t i, const Matrix& m) {
        if (m.rows() != d1_ || m.cols() != d2_) {
            throw DimMismatchError("set_slice: slice shape mismatch");
        }
        std::copy(m.data(), m.data() + m.size(), data_.data() + i * d1_ * d2_);
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const Tensor3& a, const Tensor3& b) {
        return a.d0_ == b.d0_ && a.d1_ == b.d1_ && a.d2_ == b.d2_ && a.data_ == b.data_;
    }

private:
    std::size_t d0_ = 0;
    std::size_t d1_ = 0;
    std::size_t d2_ = 0;
    std::vector<double> data_;
};

// ============================================================================
// Rng
// ============================================================================

/// Deterministic 64-bit generator: splitmix64 seeds the state of a
/// xoshiro256** core. Identical seeds give identical sequences on every
/// platform; distributions below avoid <random> on purpose, since its
/// distribution outputs are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (both branches consumed to keep the
    /// stream aligned regardless of caller parity).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n) by 128-bit multiply (no modulo bias worth
    /// caring about at these ranges).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    /// Stable sub-seed for a named component, so one CLI --seed can fan out
    /// into independent streams.
    static std::uint64_t derive(std::uint64_t seed, const std::string& name) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64 offset basis
        for (unsigned char c : name) {
            h ^= c;
            h *= 1099511628211ull;
        }
        std::uint64_t s = seed ^ h;
        return splitmix64(s);
    }

    static std::uint64_t splitmix64(std::uint64_t& state) {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

inline Matrix random_symmetric(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = rng.uniform(lo, hi);
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

/// A^T A + eps*I with eps = 1e-3 * n keeps random SPD test matrices away
/// from singularity.
inline Matrix random_spd(Rng& rng, std::size_t n) {
    Matrix a = random_matrix(rng, n, n);
    Matrix w = matmul(transpose(a), a);
    const double eps = 1e-3 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) w(i, i) += eps;
    return w;
}

// ============================================================================
// Symmetric eigendecomposition
// ============================================================================

/// Eigenvalues ascending, eigenvector columns orthonormal: A = V diag(l) V^T.
struct SymmetricSpectrum {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;

    std::size_t dim() const { return eigenvalues.size(); }

    Matrix reconstruct() const {
        const std::size_t n = dim();
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    acc += eigenvectors(i, k) * eigenvalues[k] * eigenvectors(j, k);
                m(i, j) = acc;
            }
        return m;
    }
};

constexpr std::size_t kSymEigMaxDim = 4096;
constexpr std::size_t kSymEigMaxSweeps = 100;

/// Cyclic Jacobi eigensolver for symmetric matrices. The input is
/// symmetrized as (A + A^T)/2 before iterating; sweeps run until the largest
/// off-diagonal magnitude drops below tol * max(1, |A|_max), which makes tol
/// behave as a relative threshold on well-scaled inputs. Deterministic: the
/// rotation order is fixed and ties in the final ascending sort are broken
/// by original index.
inline SymmetricSpectrum sym_eig(const Matrix& a_in, double tol = 1e-12) {
    if (a_in.rows() != a_in.cols()) throw NotSquareError(a_in.rows(), a_in.cols());
    const std::size_t n = a_in.rows();
    if (n > kSymEigMaxDim) {
        throw DimMismatchError("sym_eig: dimension " + std::to_string(n) + " exceeds max " +
                               std::to_string(kSymEigMaxDim));
    }

    Matrix a = symmetrize(a_in);
    Matrix v = Matrix::identity(n);
    const double scale = std::max(1.0, max_abs(a));
    const double threshold = tol * scale;

    if (n > 1) {
        bool converged = false;
        for (std::size_t sweep = 0; sweep < kSymEigMaxSweeps && !converged; ++sweep) {
            double off = 0.0;
            for (std::size_t p = 0; p + 1 < n; ++p)
                for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
            if (off <= threshold) {
                converged = true;
                break;
            }
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    const double apq = a(p, q);
                    if (std::fabs(apq) <= threshold * 1e-3) continue;
                    const double app = a(p, p);
                    const double aqq = a(q, q);
                    const double tau = (aqq - app) / (2.0 * apq);
                    const double t = (tau >= 0.0)
                                         ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                         : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = t * c;

                    // A <- J^T A J with J the (p,q) rotation
                    a(p, p) = app - t * apq;
                    a(q, q) = aqq + t * apq;
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        if (k == p || k == q) continue;
                        const double akp = a(k, p);
                        const double akq = a(k, q);
                        a(k, p) = c * akp - s * akq;
                        a(p, k) = a(k, p);
                        a(k, q) = s * akp + c * akq;
                        a(q, k) = a(k, q);
                    }
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p);
                        const double vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
        if (!converged) {
            double off = 0.0;
            for (std::size_t p = 0; p + 1 < n; ++p)
                for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
            if (off > threshold) {
                throw NonConvergenceError("sym_eig: off-diagonal " + std::to_string(off) +
                                          " above threshold after " +
                                          std::to_string(kSymEigMaxSweeps) + " sweeps");
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (a(i, i) != a(j, j)) return a(i, i) < a(j, j);
        return i < j;
    });

    SymmetricSpectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

// ============================================================================
// Rank estimation
// ============================================================================

/// Eigenvalues of the Gram matrix below this fraction of the largest are
/// indistinguishable from rounding noise of the A^T A formation, so they
/// never count toward the rank. Equivalent to a floor around 1e-6 * sigma_max
/// on the singular values themselves.
constexpr double kGramNoiseFloor = 1e-12;

/// Number of singular values above rel_tol * sigma_max. Singular values come
/// from the eigenvalues of A^T A (sigma_i^2 = lambda_i), so the comparison
/// happens in the eigenvalue domain: lambda > lambda_max * max(rel_tol^2,
/// noise floor). Tolerances tighter than the floor saturate at it.
inline std::size_t numeric_rank(const Matrix& a, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw ConfigError("numeric_rank: rel_tol must lie in (0,1)");
    }
    if (a.size() == 0) return 0;
    const Matrix gram = matmul(transpose(a), a);
    const SymmetricSpectrum spec = sym_eig(gram, 1e-14);
    const double lmax = spec.eigenvalues.back();
    if (lmax <= 0.0) return 0;
    const double threshold = lmax * std::max(rel_tol * rel_tol, kGramNoiseFloor);
    std::size_t rank = 0;
    for (double ev : spec.eigenvalues)
        if (ev > threshold) ++rank;
    return rank;
}

// ============================================================================
// Batched per-time mat-vec
// ============================================================================

/// Column t of the result is slices[t] * vectors[:, t]; one mat-vec per time
/// step over the contiguous slices.
inline Matrix batched_matvec(const Tensor3& slices, const Matrix& vectors) {
    const std::size_t t_len = slices.dim0();
    const std::size_t n = slices.dim1();
    if (slices.dim2() != n) {
        throw DimMismatchError("batched_matvec: slices must be square");
    }
    if (vectors.rows() != n || vectors.cols() != t_len) {
        throw DimMismatchError("batched_matvec: vectors must be " + std::to_string(n) + "x" +
                               std::to_string(t_len));
    }
    Matrix out(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* s = slices.data() + t * n * n;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            const double* r = s + i * n;
            for (std::size_t j = 0; j < n; ++j) acc += r[j] * vectors(j, t);
            out(i, t) = acc;
        }
    }
    return out;
}

}  // namespace gvnn
