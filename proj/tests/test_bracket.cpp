#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lbes/bracket.hpp"

using namespace lbes;

TEST(LieDerivativeWord, Examples) {
    const auto j4 = make_power_cost(4, 1.0);
    const auto pair = default_pair(1.0);
    EXPECT_NEAR(lie_derivative_word({2, 1}, pair, j4, 4.0), -4.5, 1e-14);
    EXPECT_DOUBLE_EQ(lie_derivative_word({1, 2}, pair, j4, 4.0), 0.0);
    for (double x : {-2.0, 0.5, 4.0})
        EXPECT_NEAR(lie_derivative_word({2, 1, 1, 1}, pair, j4, x), -j4.derivative(3, x), 1e-12);
    EXPECT_THROW(lie_derivative_word({}, pair, j4, 0.0), std::invalid_argument);
    EXPECT_THROW(lie_derivative_word({1, 3}, pair, j4, 0.0), std::invalid_argument);
    EXPECT_THROW(lie_derivative_word({1}, pair, make_quartic_2d(), 0.0), std::invalid_argument);
}

TEST(AdBracket, Examples) {
    const auto pair = default_pair(1.0);
    EXPECT_NEAR(ad_bracket(3, pair, make_power_cost(4, 1.0), 4.0), -3.0, 1e-12);
    EXPECT_NEAR(ad_bracket(3, default_pair(2.0), make_power_cost(4, 1.0), 4.0), -6.0, 1e-12);
    const auto j5 = make_power_cost(5, 0.3);
    for (double x : {-1.0, 0.0, 2.5}) EXPECT_NEAR(ad_bracket(1, pair, j5, x), -j5.derivative(1, x), 1e-12);
    EXPECT_NEAR(ad_bracket(2, pair, make_power_cost(6, 0.0, false), 1.0), -30.0, 1e-12);
    EXPECT_THROW(ad_bracket(0, pair, j5, 0.0), std::invalid_argument);
}

// ad_{g1}^N g2 = -sigma J^{(N)} and the binomial sum equals the nested recursion.
TEST(AdBracket, IdentityAndRecursion) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 5.0);
    std::vector<CostModel> costs;
    for (int m = 2; m <= 8; ++m) {
        costs.push_back(make_power_cost(m, 1.0));
        costs.push_back(make_power_cost(m, -0.5, false));
    }
    for (double sigma : {1.0, 0.7}) {
        const auto pair = default_pair(sigma);
        for (const auto& c : costs)
            for (int n = 1; n <= 5; ++n)
                for (int s = 0; s < 50; ++s) {
                    const double x = u(rng);
                    const double target = -sigma * c.derivative(n, x);
                    const double sum = ad_bracket(n, pair, c, x);
                    const double rec = ad_bracket_recursive(n, pair, c, x);
                    EXPECT_LE(std::abs(sum - target), 1e-8 * (1.0 + std::abs(target)));
                    EXPECT_LE(std::abs(sum - rec), 1e-8 * (1.0 + std::abs(rec)));
                }
    }
}

TEST(AdBracket, GradientPairFirstOrder) {
    const auto pair = gradient_pair(1.0);
    const auto j4 = make_power_cost(4, 1.0);
    for (double x : {-1.0, 0.2, 4.0}) {
        EXPECT_NEAR(ad_bracket(1, pair, j4, x), -j4.derivative(1, x), 1e-12);
        EXPECT_NEAR(ad_bracket_recursive(1, pair, j4, x), -j4.derivative(1, x), 1e-12);
        EXPECT_NEAR(ad_bracket(3, pair, j4, x), ad_bracket_recursive(3, pair, j4, x),
                    1e-8 * (1 + std::abs(ad_bracket_recursive(3, pair, j4, x))));
    }
}

TEST(AdBracket, Antisymmetry) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 4.0);
    const auto j6 = make_power_cost(6, 1.0);
    for (const auto& pair : {default_pair(1.0), gradient_pair(2.0)})
        for (int s = 0; s < 30; ++s) {
            const double x = u(rng);
            EXPECT_NEAR(composed_bracket(1, 2, pair, j6, x), -composed_bracket(2, 1, pair, j6, x), 1e-12);
        }
}

// Nested finite differences on a custom pair against the exact jets.
TEST(AdBracket, FiniteDifferencePath) {
    const auto j4 = make_power_cost(4, 1.0);
    const auto custom = custom_pair([](double) { return 1.0; }, [](double z) { return -z; });
    const auto exact = default_pair(1.0);
    for (double x : {-0.5, 2.0, 3.0})
        for (int n = 1; n <= 3; ++n) {
            const double a = ad_bracket(n, custom, j4, x);
            const double b = ad_bracket(n, exact, j4, x);
            EXPECT_NEAR(a, b, 1e-3 * (1 + std::abs(b))) << "N=" << n << " x=" << x;
            EXPECT_NEAR(ad_bracket_recursive(n, custom, j4, x), b, 1e-3 * (1 + std::abs(b)));
        }
    EXPECT_THROW(ad_bracket(4, custom, j4, 1.0), std::invalid_argument);

    // sin-type pair whose bracket is not a pure derivative
    const auto trig = custom_pair([](double z) { return std::cos(z); }, [](double z) { return std::sin(z); });
    const double x = 1.7;
    const double a = ad_bracket(2, trig, j4, x), r = ad_bracket_recursive(2, trig, j4, x);
    EXPECT_NEAR(a, r, 1e-4 * (1 + std::abs(r)));
}
