#include "mlen/information.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mlen;

namespace {

double naive_mi(const std::array<double, 4>& p) {
    const double pa[2] = {p[0] + p[1], p[2] + p[3]}, pc[2] = {p[0] + p[2], p[1] + p[3]};
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
            const double v = p[static_cast<std::size_t>(a * 2 + c)];
            if (v > 0) s += v * std::log(v / (pa[a] * pc[c]));
        }
    return s;
}

} // namespace

TEST(Units, ParseAndConvert) {
    EXPECT_EQ(parse_units("bits"), Units::bits);
    EXPECT_EQ(parse_units("nats"), Units::nats);
    EXPECT_THROW(parse_units("bans"), std::invalid_argument);
    EXPECT_NEAR(in_units(std::log(2.0), Units::bits), 1.0, 1e-15);
    EXPECT_EQ(to_string(Units::bits), "bits");
}

TEST(Entropy, KnownValues) {
    const std::vector<double> fair{0.5, 0.5}, certain{1.0, 0.0};
    EXPECT_NEAR(shannon_entropy(fair), std::log(2.0), 1e-15);
    EXPECT_EQ(shannon_entropy(certain), 0.0);
}

TEST(Mi2x2, AgreesWithDefinitionOnRandomTables) {
    testing_support::Gen gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 4> p;
        double t = 0;
        for (double& v : p) t += (v = gen.uniform(0.0, 1.0));
        for (double& v : p) v /= t;
        EXPECT_NEAR(mi_2x2(p), naive_mi(p), 1e-13);
        EXPECT_GE(mi_2x2(p), 0.0);
    }
}

TEST(Mi2x2, KeepsRelativePrecisionNearIndependence) {
    // p = product + eps * (1,-1,-1,1); I = 2 eps^2 / (product variances) to leading order
    const double eps = 1e-9;
    const std::array<double, 4> p{0.25 + eps, 0.25 - eps, 0.25 - eps, 0.25 + eps};
    const double det = p[0] * p[3] - p[1] * p[2];
    const double expected = 8.0 * eps * eps;
    EXPECT_NEAR(mi_2x2(p, det), expected, 1e-6 * expected);
    EXPECT_NEAR(mi_2x2(p), expected, 1e-4 * expected);
}

TEST(Mi2x2, PerfectCorrelationIsLog2) {
    EXPECT_NEAR(mi_2x2({0.5, 0.0, 0.0, 0.5}), std::log(2.0), 1e-15);
    EXPECT_EQ(mi_2x2({0.25, 0.25, 0.25, 0.25}), 0.0);
}

TEST(MutualInformation, GeneralTableMatchesEntropies) {
    testing_support::Gen gen(4);
    std::vector<double> p(12);
    double t = 0;
    for (double& v : p) t += (v = gen.uniform(0.0, 1.0));
    for (double& v : p) v /= t;
    std::vector<double> pa(3, 0), pc(4, 0);
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 4; ++c) {
            pa[static_cast<std::size_t>(a)] += p[static_cast<std::size_t>(a * 4 + c)];
            pc[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(a * 4 + c)];
        }
    EXPECT_NEAR(mutual_information(p, 3, 4), shannon_entropy(pa) + shannon_entropy(pc) - shannon_entropy(p), 1e-14);
}

TEST(ConditionalMutualInformation, MatchesEntropyCombination) {
    testing_support::Gen gen(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int nb = gen.integer(0, 5);
        std::vector<double> joint(std::size_t{1} << (nb + 2));
        double t = 0;
        for (double& v : joint) t += (v = gen.uniform(0.0, 1.0));
        for (double& v : joint) v /= t;
        const double cmi = conditional_mutual_information(joint, 1, nb, 1);
        EXPECT_NEAR(cmi, testing_support::cmi_by_entropies(joint, nb), 1e-13);
        EXPECT_GE(cmi, -1e-15);
    }
}

TEST(ConditionalMutualInformation, VanishesForMarkovChain) {
    const auto p = mlen::marginal(mlen::thermal_mps(0.9), 5);
    EXPECT_NEAR(conditional_mutual_information(p, 1, 3, 1), 0.0, 1e-14);
}
