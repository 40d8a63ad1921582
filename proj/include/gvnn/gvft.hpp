#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gvnn/gvsa.hpp"
#include "gvnn/linalg.hpp"

// Graph-Variate Fourier Transform: each column x(t) is projected onto the
// eigenbasis of its own connectivity slice Omega(t). Because the slices are
// symmetric the bases are orthonormal, so the transform conserves energy
// column by column and inverts exactly.

namespace gvnn {

/// Flip eigenvector columns so the largest-magnitude entry of each column is
/// positive (first index wins ties). Eigenvector sign is otherwise arbitrary,
/// and a fixed convention makes the transform deterministic.
inline void fix_eigenvector_signs(Matrix& v) {
    for (std::size_t k = 0; k < v.cols(); ++k) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            const double m = std::fabs(v(i, k));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (v(arg, k) < 0.0) {
            for (std::size_t i = 0; i < v.rows(); ++i) v(i, k) = -v(i, k);
        }
    }
}

struct GvftResult {
    Matrix coefficients;                  // N x T, column t = U_t^T x(t)
    std::vector<SymmetricSpectrum> bases;  // one spectrum per time sample
    bool sign_convention = true;  // largest-magnitude entry of each basis column positive

    std::size_t node_count() const { return coefficients.rows(); }
    std::size_t length() const { return coefficients.cols(); }
};

/// Forward transform. Operates on the raw (non-renormalized, non-z-scored)
/// tensor; per-column energy is conserved to eigensolver precision.
inline GvftResult gvft(const MultivariateSignal& sig, const SupportMatrix& support,
                       const NodeFunctionKind& kind) {
    const std::size_t n = sig.node_count();
    const std::size_t t_len = sig.length();
    const GraphVariateTensor gvt =
        graph_variate_tensor(sig, support, kind, /*renormalize=*/false, /*zave=*/false);

    GvftResult res;
    res.coefficients = Matrix(n, t_len);
    res.bases.reserve(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        SymmetricSpectrum spec = sym_eig(gvt.slices.slice(t), 1e-12);
        fix_eigenvector_signs(spec.eigenvectors);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += spec.eigenvectors(i, k) * sig.values(i, t);
            res.coefficients(k, t) = acc;
        }
        res.bases.push_back(std::move(spec));
    }
    return res;
}

/// Inverse transform: column t = U_t * xhat(t).
inline MultivariateSignal inverse_gvft(const GvftResult& res) {
    const std::size_t n = res.node_count();
    const std::size_t t_len = res.length();
    if (res.bases.size() != t_len) {
        throw DimMismatchError("inverse_gvft: " + std::to_string(res.bases.size()) +
                               " bases for " + std::to_string(t_len) + " columns");
    }
    Matrix out(n, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        const Matrix& u = res.bases[t].eigenvectors;
        if (u.rows() != n) throw DimMismatchError("inverse_gvft: basis dim mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += u(i, k) * res.coefficients(k, t);
            out(i, t) = acc;
        }
    }
    return MultivariateSignal(std::move(out));
}

// ============================================================================
// Two-tap filtering
// ============================================================================

/// y = a*x + b*Omega*x, evaluated in the node domain.
inline std::vector<double> two_tap_filter_spatial(std::span<const double> x,
                                                  const Matrix& omega, double a, double b) {
    if (omega.rows() != x.size() || omega.cols() != x.size()) {
        throw DimMismatchError("two_tap_filter_spatial: dim mismatch");
    }
    std::vector<double> y = matvec(omega, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a * x[i] + b * y[i];
    return y;
}

/// Same filter evaluated spectrally: ytilde_i = (a + b*lambda_i) * xtilde_i
/// in the eigenbasis of Omega(t), mapped back to the node domain. Agrees
/// with the spatial path to eigensolver precision.
inline std::vector<double> two_tap_filter_spectral(std::span<const double> x,
                                                   const SymmetricSpectrum& spectrum, double a,
                                                   double b) {
    const std::size_t n = spectrum.dim();
    if (x.size() != n) throw DimMismatchError("two_tap_filter_spectral: dim mismatch");
    const Matrix& v = spectrum.eigenvectors;
    std::vector<double> xt(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += v(i, k) * x[i];
        xt[k] = (a + b * spectrum.eigenvalues[k]) * acc;
    }
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += v(i, k) * xt[k];
        y[i] = acc;
    }
    return y;
}

}  // namespace gvnn
