#include "mlen/linalg.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace mlen;

TEST(QrPositive, ReconstructsWithNonnegativeDiagonal) {
    testing_support::Gen gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index rows = gen.integer(2, 12), cols = gen.integer(1, static_cast<int>(rows));
        const Matrix m = gen.gaussian(rows, cols);
        const auto [q, r] = linalg::qr_positive(m);
        EXPECT_LT((q * r - m).norm(), 1e-12 * m.norm());
        EXPECT_LT((q.transpose() * q - Matrix::Identity(cols, cols)).norm(), 1e-12);
        for (Eigen::Index i = 0; i < cols; ++i) EXPECT_GE(r(i, i), 0.0);
        for (Eigen::Index i = 0; i < cols; ++i)
            for (Eigen::Index j = 0; j < i; ++j) EXPECT_EQ(r(i, j), 0.0);
    }
}

TEST(Arnoldi, MatchesDenseLeadingEigenvalueOfPositiveMatrices) {
    testing_support::Gen gen(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = gen.integer(3, 80);
        const Matrix a = gen.positive(n, n);
        Eigen::EigenSolver<Matrix> es(a);
        double best = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) best = std::max(best, std::abs(es.eigenvalues()(i)));
        const auto res = linalg::dominant_eigenpair([&](const Vector& x, Vector& y) { y = a * x; },
                                                    Vector::Ones(n));
        EXPECT_NEAR(res.value, best, 1e-10 * best);
        EXPECT_NEAR(res.vector.norm(), 1.0, 1e-12);
        EXPECT_LT((a * res.vector - res.value * res.vector).norm(), 1e-9 * best);
        EXPECT_LT(res.next_modulus, res.value);
    }
}

TEST(Arnoldi, HandlesSmallInvariantSubspace) {
    // start vector lies in a 2-dimensional invariant subspace: breakdown path
    Matrix a = Matrix::Zero(6, 6);
    a(0, 0) = 3.0;
    a(1, 1) = 1.0;
    a(2, 2) = 5.0;
    Vector start = Vector::Zero(6);
    start(0) = 1.0;
    start(1) = 1.0;
    const auto res = linalg::dominant_eigenpair([&](const Vector& x, Vector& y) { y = a * x; }, start);
    EXPECT_NEAR(res.value, 3.0, 1e-12);
}

TEST(Flatten, RoundTripsColumnMajor) {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Vector v = linalg::flatten(m);
    EXPECT_EQ(v(1), 4.0);
    EXPECT_EQ(linalg::unflatten(v, 2, 3), m);
}
