#include "mlen/mps.hpp"
#include "mlen/glauber.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mlen;

TEST(ThermalMps, CorrelatorsAreTanhPowers) {
    for (double beta : {0.3, 1.0, 2.5}) {
        const UniformMps mps = thermal_mps(beta);
        EXPECT_NEAR(mps.spectrum().lambda0, 1.0, 1e-14);
        const auto c = spin_correlators(mps, 30);
        for (int r = 0; r <= 30; ++r) EXPECT_NEAR(c[static_cast<std::size_t>(r)], std::pow(std::tanh(beta), r), 1e-13);
        EXPECT_NEAR(magnetization(mps), 0.0, 1e-14);
    }
}

TEST(ThermalMps, UnnormalizedTransferSpectrum) {
    // [[e^b, e^-b],[e^-b, e^b]] has eigenvalues 2 cosh b and 2 sinh b
    const double beta = 0.7;
    Matrix t(2, 2);
    t << std::exp(beta), std::exp(-beta), std::exp(-beta), std::exp(beta);
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    EXPECT_NEAR(es.eigenvalues()(1), 2.0 * std::cosh(beta), 1e-14);
    EXPECT_NEAR(es.eigenvalues()(0), 2.0 * std::sinh(beta), 1e-14);
    EXPECT_NEAR(thermal_mps(beta).spectrum().gap_ratio, std::tanh(beta), 1e-12);
}

TEST(ThermalMps, MarginalMatchesIsingWeights) {
    const double beta = 0.9, t = std::tanh(beta);
    const auto p = marginal(thermal_mps(beta), 4);
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
        int s[4];
        for (int i = 0; i < 4; ++i) s[i] = ((idx >> (3 - i)) & 1u) ? -1 : 1;
        double w = 0.5;
        for (int i = 0; i < 3; ++i) w *= 0.5 * (1.0 + t * s[i] * s[i + 1]);
        EXPECT_NEAR(p[idx], w, 1e-14);
    }
}

TEST(CatMps, PureCatAndDepolarizedMarginals) {
    const auto pure = marginal(depolarized_cat_mps(0.0), 3);
    EXPECT_NEAR(pure[0], 0.5, 1e-15);
    EXPECT_NEAR(pure[7], 0.5, 1e-15);
    const double p = 0.25, q = 0.75;
    const auto two = marginal(depolarized_cat_mps(p), 2);
    EXPECT_NEAR(two[0], 0.5 * (q * q + p * p), 1e-15);
    EXPECT_NEAR(two[1], p * q, 1e-15);
    EXPECT_TRUE(depolarized_cat_mps(p).z2_symmetric());
}

TEST(PolarizedMps, IsAllUp) {
    const UniformMps mps = polarized_mps();
    EXPECT_EQ(mps.max_bond_dim(), 1);
    EXPECT_NEAR(marginal(mps, 5)[0], 1.0, 1e-15);
    EXPECT_NEAR(mean_magnetization(mps), 1.0, 1e-15);
}

TEST(ProductMps, TensorSumIsTheEigenvalue) {
    const UniformMps mps = product_mps(0.3);
    EXPECT_NEAR(mean_magnetization(mps), -0.4, 1e-15);
    const auto p = marginal(mps, 2);
    EXPECT_NEAR(p[3], 0.49, 1e-15);
}

TEST(Symmetrize, GivesTheFlipAveragedState) {
    const UniformMps sym = symmetrize(product_mps(0.8));
    EXPECT_TRUE(sym.z2_symmetric());
    EXPECT_NEAR(mean_magnetization(sym), 0.0, 1e-15);
    const auto p = marginal(sym, 2);
    EXPECT_NEAR(p[0], 0.5 * (0.64 + 0.04), 1e-15);
    EXPECT_THROW(symmetrize(sym), std::invalid_argument);
}

TEST(UniformMpsProperty, MarginalsAgreeWithIndependentContraction) {
    testing_support::Gen gen(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int cell = gen.integer(1, 2);
        const Eigen::Index d = gen.integer(1, 6);
        const auto tensors = gen.positive_cell(cell, d);
        const UniformMps mps(tensors);
        EXPECT_NEAR(mps.spectrum().lambda0, 1.0, 1e-12);
        const int k = gen.integer(1, 6);
        for (int origin = 0; origin < cell; ++origin) {
            const auto expected = testing_support::window_distribution(tensors, k, origin);
            const auto got = marginal(mps, k, origin);
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
        }
    }
}

TEST(UniformMpsProperty, MarginalsAreConsistentAndNormalized) {
    testing_support::Gen gen(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int cell = gen.integer(1, 2);
        const UniformMps mps(gen.positive_cell(cell, gen.integer(1, 5)));
        const long origin = gen.integer(0, 5);
        const int k = gen.integer(2, 8);
        const auto big = marginal(mps, k, origin);
        const auto small = marginal(mps, k - 1, origin);
        const auto shifted = marginal(mps, k - 1, origin + 1);
        double total = 0.0;
        for (double x : big) total += x;
        EXPECT_NEAR(total, 1.0, 1e-13);
        for (std::size_t i = 0; i < small.size(); ++i) EXPECT_NEAR(small[i], big[2 * i] + big[2 * i + 1], 1e-13);
        const std::size_t half = shifted.size();
        for (std::size_t i = 0; i < half; ++i) EXPECT_NEAR(shifted[i], big[i] + big[i + half], 1e-13);
    }
}

TEST(UniformMpsProperty, CorrelatorFromMarginal) {
    testing_support::Gen gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        const UniformMps mps(gen.positive_cell(2, 3));
        for (long origin = 0; origin < 2; ++origin) {
            const auto p = marginal(mps, 4, origin);
            double c = 0.0;
            for (std::size_t idx = 0; idx < p.size(); ++idx) c += p[idx] * (((idx >> 3) & 1u) == (idx & 1u) ? 1 : -1);
            EXPECT_NEAR(spin_correlator_from(mps, origin, 3), c, 1e-13);
        }
    }
}

TEST(Spectrum, DenseAndArnoldiAgree) {
    testing_support::Gen gen(3);
    const auto cell = gen.positive_cell(2, 10);
    SpectrumOptions dense, iterative;
    iterative.dense_limit = 1;
    const auto a = transfer_spectrum(cell, false, dense);
    const auto b = transfer_spectrum(cell, false, iterative);
    EXPECT_NEAR(a.lambda0, b.lambda0, 1e-10 * a.lambda0);
    EXPECT_NEAR(a.left.dot(a.right), 1.0, 1e-12);
    EXPECT_NEAR(b.left.dot(b.right), 1.0, 1e-10);
    EXPECT_LT((a.right / a.right.sum() - b.right / b.right.sum()).norm(), 1e-9);
}

TEST(Spectrum, DegenerateBlockDiagonalUsesEqualWeights) {
    // two decoupled sectors with equal leading eigenvalue, no symmetry flag
    Matrix up = Matrix::Zero(2, 2), down = Matrix::Zero(2, 2);
    up(0, 0) = 0.9;
    up(1, 1) = 0.1;
    down(0, 0) = 0.1;
    down(1, 1) = 0.9;
    const UniformMps mps({SiteTensor{up, down}});
    EXPECT_TRUE(mps.spectrum().degenerate);
    EXPECT_NEAR(mean_magnetization(mps), 0.0, 1e-14);
    EXPECT_NEAR(spin_correlator(mps, 5), std::pow(0.8, 2), 1e-14);
}

TEST(Clamp, TinyNegativesAreClampedLargeOnesThrow) {
    std::vector<double> p{0.5, 0.5 + 5e-10, -5e-10};
    clamp_probabilities(p, "test");
    EXPECT_EQ(p[2], 0.0);
    std::vector<double> bad{1.1, -0.1};
    EXPECT_THROW(clamp_probabilities(bad, "test"), NumericalError);
}

TEST(Marginal, RejectsTooManySites) {
    EXPECT_THROW(marginal(thermal_mps(1.0), kMaxMarginalSites + 1), std::invalid_argument);
}
