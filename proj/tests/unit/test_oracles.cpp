#include "mlen/oracles.hpp"
#include "mlen/information.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace mlen;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(DepolCatParams, Relations) {
    const auto c = DepolCatParams::from_p(0.2);
    EXPECT_DOUBLE_EQ(c.q, 0.8);
    EXPECT_NEAR(c.lambda, 0.25, 1e-15);
    EXPECT_NEAR(c.z, std::log(4.0), 1e-15);
    EXPECT_NEAR(c.m, std::tanh(c.z / 2), 1e-15);
    EXPECT_NEAR(DepolCatParams::from_time(1.0).p, 0.5 * (1 - std::exp(-1.0)), 1e-16);
    EXPECT_THROW(DepolCatParams::from_p(0.6), std::invalid_argument);
}

TEST(ThermalLength, KnownValues) {
    EXPECT_NEAR(thermal_correlation_length(1.2), -1.0 / std::log(std::tanh(1.2)), 1e-12);
    EXPECT_NEAR(thermal_correlation_length(2.0), 27.296, 1e-3);
    EXPECT_TRUE(std::isinf(thermal_correlation_length(kInf)));
    // stays accurate where tanh rounds to 1
    EXPECT_NEAR(thermal_correlation_length(10.0), 0.5 * std::exp(20.0), 1e-6 * std::exp(20.0));
}

TEST(CatConditional, MatchesBruteForceConditional) {
    const double p = 0.3;
    const int b = 4;
    const auto joint = marginal(depolarized_cat_mps(p), b + 2);
    for (int ups = 0; ups <= b; ++ups) {
        // pick B = ups up spins followed by downs
        std::size_t mid = 0;
        for (int i = 0; i < b; ++i) mid = (mid << 1) | (i < ups ? 0u : 1u);
        std::array<double, 4> want;
        double t = 0;
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) t += want[static_cast<std::size_t>(a * 2 + c)] = joint[(static_cast<std::size_t>(a) << (b + 1)) | (mid << 1) | static_cast<std::size_t>(c)];
        const auto got = depolarized_cat_conditional(p, ups - b / 2);
        double gt = got[0] + got[1] + got[2] + got[3];
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)] / gt, want[static_cast<std::size_t>(i)] / t, 1e-13);
    }
}

TEST(ExactCatCmi, MatchesBruteForceSmallBlocks) {
    for (double p : {0.05, 0.2, 0.45})
        for (int b = 2; b <= 8; b += 2) {
            const auto joint = marginal(depolarized_cat_mps(p), b + 2);
            EXPECT_NEAR(exact_cmi_depolarized_cat(p, b), testing_support::cmi_by_entropies(joint, b), 1e-12);
        }
}

TEST(ExactCatCmi, EdgeCasesAndFrozenValues) {
    EXPECT_EQ(exact_cmi_depolarized_cat(0.0, 4), 0.0);
    EXPECT_EQ(exact_cmi_depolarized_cat(0.5, 4), 0.0);
    EXPECT_THROW(exact_cmi_depolarized_cat(0.2, 3), std::invalid_argument);
    EXPECT_THROW(exact_cmi_depolarized_cat(0.2, 0), std::invalid_argument);
    // frozen from an independent high-precision evaluation
    EXPECT_NEAR(exact_cmi_depolarized_cat(0.25, 2), 0.015352880891684063, 1e-15);
    EXPECT_NEAR(exact_cmi_depolarized_cat(0.45, 2000), 2.9947e-10, 1e-13);
}

TEST(AsymptoticCmi, ApproachesExactInScalingRegime) {
    const double p = 0.45;
    const auto a = asymptotic_cmi(p, 2000);
    EXPECT_TRUE(a.valid);
    EXPECT_NEAR(a.value / exact_cmi_depolarized_cat(p, 2000), 1.0, 0.1);
    EXPECT_FALSE(asymptotic_cmi(0.1, 4).valid);
}

TEST(XiStar, SmallZForm) {
    EXPECT_DOUBLE_EQ(xi_star(0.0), 2.0);
    const double t = 3.0;
    // 8 / z^2 with z = 2 artanh(e^-t) differs from 2 e^{2t} at order e^{-2t}
    EXPECT_NEAR(xi_star_from_p(DepolCatParams::from_time(t).p) / xi_star(t), 1.0 - 2.0 / 3.0 * std::exp(-2.0 * t), 1e-5);
    EXPECT_NEAR(collapse_master_curve(1.0), 2.0 * std::exp(-1.0) / std::sqrt(6.0), 1e-15);
}

TEST(MagnetizationRecursion, AlphaOneSingleSweep) {
    // even sites: m' = gamma m; odd sites: m'' = gamma (m' + m') / 2
    const double g = std::tanh(2 * 1.5);
    const auto m = magnetization_after(1.0, 1.5, 1.0, 1);
    EXPECT_NEAR(m[0], g, 1e-15);
    EXPECT_NEAR(m[1], g * g, 1e-15);
    EXPECT_THROW(magnetization_recursion({1.0, 1.0, 1.0}, 1.0, 0.5), std::invalid_argument);
}

TEST(CorrelatorRecursion, MatchesBruteForceWindow) {
    struct Case {
        double beta_i, beta_f, alpha;
    };
    for (const Case c : {Case{kInf, 1.0, 1.0}, Case{0.8, 0.5, 0.5}, Case{1.5, 1.0, 0.3}}) {
        const int sweeps = 2, r_out = 3;
        const auto table = correlator_recursion(c.beta_i, c.beta_f, c.alpha, sweeps, r_out + 4 * sweeps, r_out);
        const int first = -6;
        testing_support::WindowChain chain(first, 16, testing_support::thermal_weight(c.beta_i));
        for (int s = 0; s < sweeps; ++s) chain.sweep(c.beta_f, c.alpha);
        for (int r = 0; r <= r_out; ++r) {
            double avg = 0;
            for (int origin = 0; origin < 2; ++origin) {
                const int i = chain.index(origin), j = chain.index(origin + r);
                avg += 0.5 * chain.expectation([&](const std::vector<int>& s) {
                    return static_cast<double>(s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)]);
                });
            }
            EXPECT_NEAR(table[sweeps][static_cast<std::size_t>(r)], avg, 1e-11) << "r = " << r;
        }
    }
}

TEST(CorrelatorRecursion, ThermalStationaryAndBoundaryGuard) {
    CorrelatorRecursion rec(1.1, 1.1, 0.5, 40);
    for (int s = 0; s < 5; ++s) rec.sweep();
    for (int r = 0; r <= rec.trusted_range(); ++r) EXPECT_NEAR(rec.correlator(r), std::pow(std::tanh(1.1), r), 1e-14);
    EXPECT_EQ(rec.trusted_range(), 20);
    EXPECT_THROW(correlator_recursion(1.0, 1.0, 0.5, 5, 20, 3), std::invalid_argument);
}

TEST(ThermalMi, MatchesTwoSpinContraction) {
    for (double beta : {0.5, 1.0, 2.0})
        for (int b = 0; b <= 6; ++b) {
            const auto joint = marginal(thermal_mps(beta), b + 2);
            std::array<double, 4> two{};
            for (std::size_t idx = 0; idx < joint.size(); ++idx)
                two[((idx >> (b + 1)) & 1u) * 2 + (idx & 1u)] += joint[idx];
            EXPECT_NEAR(thermal_mi(beta, b), mi_2x2(two), 1e-13);
        }
    EXPECT_NEAR(thermal_mi(0.3, 40) / thermal_mi_tail(0.3, 40), std::pow(std::tanh(0.3), 2), 1e-3);
}

TEST(MarkovPrediction, Scenarios) {
    EXPECT_EQ(parse_markov_scenario("ground-to-finite"), MarkovScenario::ground_to_finite);
    EXPECT_THROW(parse_markov_scenario("other"), std::invalid_argument);
    MarkovPredictionInputs in;
    in.t = 1.0;
    in.beta_i = 1.5;
    in.beta_f = 1.2;
    in.magnetization = 0.5;
    EXPECT_DOUBLE_EQ(markov_length_prediction(MarkovScenario::depolarized_cat, in), xi_star(1.0));
    EXPECT_DOUBLE_EQ(markov_length_prediction(MarkovScenario::thermal_late_time, in), 0.5 * thermal_correlation_length(1.5));
    EXPECT_DOUBLE_EQ(markov_length_prediction(MarkovScenario::ground_to_finite, in), 4.0 * thermal_correlation_length(1.2));
}

TEST(BruteForceCmi, RejectsOversizedBlocks) {
    EXPECT_THROW(brute_force_cmi(thermal_mps(1.0), kMaxMarginalSites), std::invalid_argument);
}
