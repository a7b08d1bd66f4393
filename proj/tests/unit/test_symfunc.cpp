#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hypaf/symfunc.hpp"
#include "oracles.hpp"

using hypaf::sym::KappaVector;
namespace sym = hypaf::sym;

TEST(KappaVector, RejectsEmptyAndNonFinite)
{
    EXPECT_THROW(KappaVector(std::vector<double>{}), hypaf::DomainError);
    EXPECT_THROW((KappaVector{1.0, NAN}), hypaf::DomainError);
    EXPECT_THROW((KappaVector{INFINITY}), hypaf::DomainError);
    EXPECT_THROW(KappaVector(std::vector<double>(65, 1.0)), hypaf::DomainError);
}

TEST(Sigma, WorkedValues)
{
    EXPECT_DOUBLE_EQ(sym::sigma(2, {1, 1, 1, 1}), 6.0);
    // enumeration of the four 3-subsets of (1,2,3,4): 6 + 8 + 12 + 24
    EXPECT_DOUBLE_EQ(sym::sigma(3, {1, 2, 3, 4}), 50.0);
    const double c = 1.0 / std::tanh(1.0);
    EXPECT_NEAR(sym::sigma(4, KappaVector(std::vector<double>(5, c))), 5 * std::pow(c, 4), 1e-13);
    EXPECT_NEAR(sym::sigma(4, KappaVector(std::vector<double>(5, c))), 14.862, 5e-4);
}

TEST(Sigma, ConventionsAndRange)
{
    const KappaVector k{1, 2, 3};
    EXPECT_EQ(sym::sigma(0, k), 1.0);
    EXPECT_EQ(sym::sigma(-1, k), 0.0);
    EXPECT_THROW((void)sym::sigma(4, k), hypaf::DomainError);
    EXPECT_THROW((void)sym::sigma(-2, k), hypaf::DomainError);
}

TEST(Sigma, MatchesSubsetEnumeration)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + trial % 8;
        std::vector<double> x(static_cast<std::size_t>(m));
        for (double& v : x) v = u(rng);
        const KappaVector kappa(x);
        for (int k = 0; k <= m; ++k) {
            const double ref = hypaf::testing::sigma_enumerate(k, x);
            EXPECT_NEAR(sym::sigma(k, kappa), ref, 1e-12 * std::max(1.0, std::abs(ref)) * std::pow(3.0, k));
        }
    }
}

TEST(Sigma, PermutationInvariantBitForBit)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(12);
        for (double& v : x) v = u(rng);
        const auto base = sym::elementary_symmetric<double>(x);
        std::shuffle(x.begin(), x.end(), rng);
        const auto shuffled = sym::elementary_symmetric<double>(x);
        ASSERT_EQ(base, shuffled);
    }
}

TEST(PMean, WorkedValues)
{
    for (int k = 0; k <= 6; ++k) EXPECT_DOUBLE_EQ(sym::p_mean(k, KappaVector(std::vector<double>(6, 1.0))), 1.0);
    EXPECT_NEAR(sym::p_mean(4, {2, 1, 1, 1, 1}), 1.8, 1e-15);
    EXPECT_DOUBLE_EQ(sym::p_mean(1, {1, 2, 3, 4}), 2.5);
    EXPECT_THROW((void)sym::p_mean(5, {1, 2, 3, 4}), hypaf::DomainError);
}

TEST(GardingCone, Membership)
{
    EXPECT_TRUE(sym::in_gamma_k({1, 1, 1, 1}, 4));
    EXPECT_FALSE(sym::in_gamma_k({-1, -1, -1}, 1));
    // direct evaluation: sigma_1 = 6.9, sigma_2 = 15.3; sigma_3 < 0
    const std::vector<double> x{3, -0.1, 2, 2};
    EXPECT_GT(hypaf::testing::sigma_enumerate(2, x), 0.0);
    EXPECT_TRUE(sym::in_gamma_k(KappaVector(x), 2));
    EXPECT_EQ(sym::in_gamma_k(KappaVector(x), 3), hypaf::testing::sigma_enumerate(3, x) > 0);
}

TEST(NewtonMacLaurin, WorkedValues)
{
    EXPECT_NEAR(sym::nm_gap_upper(2, {1, 1, 1, 1}), 0.0, 1e-15);
    EXPECT_NEAR(sym::nm_gap_upper(2, {1, 2, 3, 4}), 4.0 / 9.0 - 500.0 / 1225.0, 1e-15);
    EXPECT_NEAR(sym::nm_gap_upper(2, {1, 2, 3, 4}), 0.03628, 1e-5);
    EXPECT_NEAR(sym::nm_gap_upper(1, {1, 1, 1, 2}), 0.015, 1e-15);

    EXPECT_NEAR(sym::nm_gap_lower(3, {1, 1, 1, 1, 1}), 0.0, 1e-14);
    EXPECT_NEAR(sym::nm_gap_lower(2, {1, 2, 3, 4}), 4.0 / 21.0, 1e-14);
    EXPECT_NEAR(sym::nm_gap_lower(4, {2, 1, 1, 1, 1}), 96.0 / 9.0 - 10.0, 1e-13);
}

TEST(NewtonMacLaurin, PreconditionsChecked)
{
    EXPECT_THROW((void)sym::nm_gap_upper(2, {-1, -1, 3, 0.5}), hypaf::PreconditionError);
    EXPECT_THROW((void)sym::nm_gap_upper(4, {1, 2, 3, 4}), hypaf::DomainError);
    EXPECT_THROW((void)sym::nm_gap_lower(1, {-1, -2}), hypaf::PreconditionError);
}

TEST(NewtonMacLaurin, NonnegativeOnGardingSamplesAndZeroOnRays)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 6.0);
    int tested = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        const int m = 2 + trial % 9;
        std::vector<double> x(static_cast<std::size_t>(m));
        for (double& v : x) v = u(rng);
        const KappaVector kappa(x);
        for (int k = 1; k <= m - 1; ++k) {
            if (!sym::in_gamma_k(kappa, k)) break;
            ++tested;
            EXPECT_GE(sym::nm_gap_upper(k, kappa), -1e-12);
            EXPECT_GE(sym::nm_gap_lower(k, kappa), -1e-12);
        }
    }
    EXPECT_GT(tested, 10000);

    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 2 + trial % 10;
        const KappaVector ray(std::vector<double>(static_cast<std::size_t>(m), scale(rng)));
        for (int k = 1; k <= m - 1; ++k) {
            EXPECT_LT(std::abs(sym::nm_gap_upper(k, ray)), 1e-10);
            EXPECT_LT(std::abs(sym::nm_gap_lower(k, ray)), 1e-10);
        }
    }
}

TEST(Binomial, SmallTable)
{
    EXPECT_EQ(sym::binomial(5, 2), 10.0);
    EXPECT_EQ(sym::binomial(30, 15), 155117520.0);
    EXPECT_EQ(sym::binomial(4, 5), 0.0);
    EXPECT_EQ(sym::binomial(4, -1), 0.0);
}
