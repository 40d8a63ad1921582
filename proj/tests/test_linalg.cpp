#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gvnn/linalg.hpp"

using namespace gvnn;

namespace {

Matrix rank3_squared_difference(const std::vector<double>& x) {
    // u 1^T - 2 v v^T + 1 u^T with u = x o x, v = x
    const std::size_t n = x.size();
    Matrix j(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            j(i, k) = x[i] * x[i] - 2.0 * x[i] * x[k] + x[k] * x[k];
    return j;
}

}  // namespace

// ============================================================================
// sym_eig
// ============================================================================

TEST(SymEig, IdentityThreeByThree) {
    const auto spec = sym_eig(Matrix::identity(3), 1e-12);
    ASSERT_EQ(spec.dim(), 3u);
    for (double ev : spec.eigenvalues) EXPECT_DOUBLE_EQ(ev, 1.0);
    // eigenvectors must be a signed permutation of the identity columns
    for (std::size_t k = 0; k < 3; ++k) {
        std::size_t nonzero = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (std::fabs(spec.eigenvectors(i, k)) > 1e-12) {
                ++nonzero;
                EXPECT_NEAR(std::fabs(spec.eigenvectors(i, k)), 1.0, 1e-12);
            }
        }
        EXPECT_EQ(nonzero, 1u);
    }
}

TEST(SymEig, TwoByTwoExchange) {
    Matrix a(2, 2, {0.0, 1.0, 1.0, 0.0});
    const auto spec = sym_eig(a, 1e-14);
    EXPECT_NEAR(spec.eigenvalues[0], -1.0, 1e-14);
    EXPECT_NEAR(spec.eigenvalues[1], 1.0, 1e-14);
}

TEST(SymEig, RandomEightByEightReconstruction) {
    Rng rng(77);
    const Matrix a = random_symmetric(rng, 8);
    const auto spec = sym_eig(a, 1e-13);
    EXPECT_LT(max_abs_diff(spec.reconstruct(), a), 1e-8);
}

TEST(SymEig, OrthonormalityAndReconstructionProperty) {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(15);  // 2..16
        const Matrix a = random_symmetric(rng, n, -2.0, 2.0);
        const auto spec = sym_eig(a, 1e-13);

        const Matrix vtv = matmul(transpose(spec.eigenvectors), spec.eigenvectors);
        EXPECT_LT(max_abs_diff(vtv, Matrix::identity(n)), 1e-8);
        EXPECT_LT(max_abs_diff(spec.reconstruct(), a), 1e-7 * std::max(1.0, max_abs(a)));
        for (std::size_t k = 1; k < n; ++k)
            EXPECT_LE(spec.eigenvalues[k - 1], spec.eigenvalues[k]);
    }
}

TEST(SymEig, DeterministicForFixedInput) {
    Rng rng(5);
    const Matrix a = random_symmetric(rng, 6);
    const auto s1 = sym_eig(a, 1e-12);
    const auto s2 = sym_eig(a, 1e-12);
    EXPECT_TRUE(s1.eigenvectors == s2.eigenvectors);
    EXPECT_EQ(s1.eigenvalues, s2.eigenvalues);
}

TEST(SymEig, RejectsNonSquare) {
    EXPECT_THROW(sym_eig(Matrix(2, 3), 1e-12), NotSquareError);
}

// ============================================================================
// numeric_rank
// ============================================================================

TEST(NumericRank, ZeroMatrix) { EXPECT_EQ(numeric_rank(Matrix(5, 5), 1e-10), 0u); }

TEST(NumericRank, OuterProductIsRankOne) {
    Rng rng(9);
    const std::size_t n = 7;
    std::vector<double> u(n);
    for (auto& v : u) v = rng.uniform(-1.0, 1.0) + 2.0;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = u[i] * u[j];
    EXPECT_EQ(numeric_rank(a, 1e-10), 1u);
}

TEST(NumericRank, SquaredDifferenceMatrixIsRankThree) {
    std::vector<double> x{0.3, -1.2, 2.5, 0.9, -0.4, 1.7, -2.2, 0.05, 3.1, -0.8};
    EXPECT_EQ(numeric_rank(rank3_squared_difference(x), 1e-10), 3u);
}

TEST(NumericRank, SumOfTwoOuterProductsAtMostTwo) {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng.uniform_index(10);
        Matrix a(n, n);
        for (int p = 0; p < 2; ++p) {
            std::vector<double> u(n), v(n);
            for (auto& w : u) w = rng.normal();
            for (auto& w : v) w = rng.normal();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) a(i, j) += u[i] * v[j];
        }
        EXPECT_LE(numeric_rank(a, 1e-10), 2u);
    }
}

TEST(NumericRank, RejectsBadTolerance) {
    EXPECT_THROW(numeric_rank(Matrix(2, 2), 0.0), ConfigError);
    EXPECT_THROW(numeric_rank(Matrix(2, 2), 1.0), ConfigError);
}

// ============================================================================
// batched_matvec
// ============================================================================

TEST(BatchedMatvec, IdentitySlicesPassThrough) {
    Rng rng(3);
    const std::size_t n = 4, t_len = 6;
    Tensor3 slices(t_len, n, n);
    for (std::size_t t = 0; t < t_len; ++t) slices.set_slice(t, Matrix::identity(n));
    const Matrix x = random_matrix(rng, n, t_len);
    EXPECT_TRUE(batched_matvec(slices, x) == x);
}

TEST(BatchedMatvec, SingleSwapSlice) {
    Tensor3 slices(1, 2, 2);
    slices.set_slice(0, Matrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
    Matrix x(2, 1, {3.0, 5.0});
    const Matrix y = batched_matvec(slices, x);
    EXPECT_DOUBLE_EQ(y(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(y(1, 0), 3.0);
}

TEST(BatchedMatvec, MatchesPerTimeLoop) {
    Rng rng(11);
    const std::size_t n = 3, t_len = 4;
    Tensor3 slices(t_len, n, n);
    for (std::size_t t = 0; t < t_len; ++t) slices.set_slice(t, random_matrix(rng, n, n));
    const Matrix x = random_matrix(rng, n, t_len);

    const Matrix fast = batched_matvec(slices, x);
    for (std::size_t t = 0; t < t_len; ++t) {
        const auto y = matvec(slices.slice(t), x.col(t));
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fast(i, t), y[i], 1e-12);
    }
}

TEST(BatchedMatvec, RejectsMismatchedShapes) {
    Tensor3 slices(2, 3, 3);
    EXPECT_THROW(batched_matvec(slices, Matrix(3, 3)), DimMismatchError);
    EXPECT_THROW(batched_matvec(slices, Matrix(2, 2)), DimMismatchError);
}

// ============================================================================
// Tensor3 / Matrix plumbing
// ============================================================================

TEST(Tensor3, SliceRoundTrip) {
    Rng rng(21);
    Tensor3 t(3, 4, 4);
    const Matrix m = random_matrix(rng, 4, 4);
    t.set_slice(1, m);
    EXPECT_TRUE(t.slice(1) == m);
    EXPECT_TRUE(t.slice(0) == Matrix(4, 4));
}

TEST(Matrix, DataLengthValidated) {
    EXPECT_THROW(Matrix(2, 3, std::vector<double>{1.0, 2.0}), ShapeMismatchError);
}

// ============================================================================
// Rng
// ============================================================================

TEST(RngTest, SameSeedSameSequence) {
    Rng a(124), b(124);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, KnownSeedsDiffer) {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {124ull, 14ull, 124235ull}) firsts.insert(Rng(seed).next_u64());
    EXPECT_EQ(firsts.size(), 3u);
}

TEST(RngTest, DeriveSeparatesComponents) {
    const auto s1 = Rng::derive(124, "data");
    const auto s2 = Rng::derive(124, "train");
    EXPECT_NE(s1, s2);
    EXPECT_EQ(s1, Rng::derive(124, "data"));
}

TEST(RngTest, UniformInRangeAndPermutationValid) {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    const auto p = rng.permutation(50);
    std::set<std::size_t> seen(p.begin(), p.end());
    EXPECT_EQ(seen.size(), 50u);
}
