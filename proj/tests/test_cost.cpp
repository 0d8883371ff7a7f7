#include <cmath>
#include <random>

#include <vector>

#include <gtest/gtest.h>

#include "lbes/cost.hpp"

using namespace lbes;

TEST(PowerCost, Examples) {
    const auto j4 = make_power_cost(4, 1.0);
    EXPECT_DOUBLE_EQ(j4.derivative(3, 4.0), 3.0);
    EXPECT_DOUBLE_EQ(j4.evaluate(1.0), 0.0);
    for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(j4.derivative(k, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(j4.derivative(4, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(j4.derivative(5, 3.0), 0.0);

    const auto x6 = make_power_cost(6, 0.0, false);
    for (double x : {-1.5, 0.3, 2.0}) EXPECT_NEAR(x6.derivative(5, x), 720 * x, 1e-12);
    EXPECT_THROW(make_power_cost(1, 0.0), std::invalid_argument);
}

TEST(Quartic2d, Examples) {
    const auto q = make_quartic_2d();
    const Point star{1, 1}, origin{0, 0}, p{2, 0};
    EXPECT_DOUBLE_EQ(q.evaluate(star), 0.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (int k = 1; k <= 3; ++k) EXPECT_DOUBLE_EQ(q.partial_derivative(i, k, star), 0.0);
    EXPECT_DOUBLE_EQ(q.evaluate(origin), 1.0);
    EXPECT_DOUBLE_EQ(q.partial_derivative(0, 3, p), 72.0);
    EXPECT_DOUBLE_EQ(q.partial_derivative(1, 3, p), -48.0);
    // stated closed forms
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 3);
    for (int i = 0; i < 20; ++i) {
        const Point x{u(rng), u(rng)};
        EXPECT_NEAR(q.partial_derivative(0, 3, x), 24 * (x[0] - 1) + 24 * (x[0] - x[1]), 1e-12);
        EXPECT_NEAR(q.partial_derivative(1, 3, x), -24 * (x[0] - x[1]), 1e-12);
    }
}

TEST(CostModel, MinimizerIsStrict) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-3, 5);
    const auto q = make_quartic_2d();
    const auto j6 = make_power_cost(6, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Point x{u(rng), u(rng)};
        EXPECT_GT(q.evaluate(x), q.minimum());
        EXPECT_GT(j6.evaluate(x[0]), j6.minimum());
    }
}

// Exact partials against the built-in finite-difference fallback.
namespace {

// Central differences with Richardson extrapolation over step halvings. The
// truncation series is even in h, so polynomials up to degree k + 2 levels are
// recovered up to rounding and a wide step keeps rounding small.
template <class F>
double richardson(F&& f, double x, int k, double h, int levels = 5) {
    std::vector<std::vector<double>> t(levels);
    for (int i = 0; i < levels; ++i) {
        t[i].push_back(detail::central_difference(f, x, k, h / double(1 << i)));
        double p = 4.0;
        for (int j = 1; j <= i; ++j, p *= 4.0) t[i].push_back(t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (p - 1.0));
    }
    return t.back().back();
}

}  // namespace

TEST(CostModel, ExactMatchesFiniteDifference) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 3.0);

    for (int m : {2, 4, 6, 8}) {
        const auto exact = make_power_cost(m, 1.0);
        const auto fd = make_sampled_cost(1, [&](std::span<const double> x) { return exact.evaluate(x); }, {1.0}, 0.0);
        EXPECT_FALSE(fd.exact_derivatives());
        for (int k = 1; k <= m - 1; ++k) {
            for (int s = 0; s < 100; ++s) {
                // keep away from x* where low-order derivatives vanish
                double x = u(rng);
                if (std::abs(x - 1.0) < 0.25) x += 0.5;
                const double a = exact.derivative(k, x);
                const double b =
                    richardson([&](double s2) { return exact.evaluate(s2); }, x, k, 2.0 * std::max(1.0, std::abs(x)));
                EXPECT_LE(std::abs(a - b), 1e-5 * std::abs(a)) << "m=" << m << " k=" << k << " x=" << x;
            }
        }
        // default step on the fallback path, low orders
        for (int k = 1; k <= std::min(3, m - 1); ++k) {
            const double x = 2.3;
            EXPECT_NEAR(fd.derivative(k, x), exact.derivative(k, x), 1e-5 * std::abs(exact.derivative(k, x)));
        }
    }

    const auto q = make_quartic_2d();
    for (int s = 0; s < 100; ++s) {
        const Point x{u(rng), u(rng) + 2.0};
        for (std::size_t i = 0; i < 2; ++i)
            for (int k = 1; k <= 3; ++k) {
                Point w = x;
                auto along = [&](double v) {
                    w[i] = v;
                    return q.evaluate(w);
                };
                const double a = q.partial_derivative(i, k, x);
                const double b = richardson(along, x[i], k, 1.0);
                EXPECT_LE(std::abs(a - b), 1e-5 * std::max(std::abs(a), 1.0));
            }
    }
}

TEST(VectorFieldPair, DefaultPair) {
    const auto p = default_pair(1.0);
    EXPECT_DOUBLE_EQ(p.g1(5.0), 1.0);
    EXPECT_DOUBLE_EQ(p.g2(5.0), -5.0);
    EXPECT_TRUE(p.matches_derivative(7));
    EXPECT_DOUBLE_EQ(default_pair(2.0).g2(5.0), -10.0);
    EXPECT_THROW(default_pair(0.0), std::invalid_argument);

    const auto g = gradient_pair(1.0);
    EXPECT_DOUBLE_EQ(g.g1(2.5), 2.5);
    EXPECT_DOUBLE_EQ(g.g2(2.5), 1.0);
    EXPECT_TRUE(g.matches_derivative(1));
    EXPECT_FALSE(g.matches_derivative(3));
}

TEST(VerifyAssumption, Quartic2d) {
    const auto rep = verify_assumption(make_quartic_2d(), 4, Box{{-1, -1}, {3, 3}}, 41);
    EXPECT_EQ(rep.samples, 41u * 41u - 1u);
    EXPECT_TRUE(rep.violations.empty());
    EXPECT_GE(rep.beta1, 8.0);
    EXPECT_LE(rep.alpha2, 5.0);
    EXPECT_LE(rep.alpha1, rep.alpha2);
    EXPECT_LE(rep.beta1, rep.beta2);
    EXPECT_NE(rep.sampling.find("41x41"), std::string::npos);
}

TEST(VerifyAssumption, PowerCost) {
    const auto rep = verify_assumption(make_power_cost(4, 1.0), 4, Box{{-4}, {6}}, 101);
    EXPECT_NEAR(rep.alpha1, 1.0 / 24, 1e-14);
    EXPECT_NEAR(rep.alpha2, 1.0 / 24, 1e-14);
    EXPECT_TRUE(rep.violations.empty());
    for (int m : {2, 3, 6}) {
        for (auto box : {Box{{0.5}, {1.5}}, Box{{-10}, {2}}}) {
            EXPECT_TRUE(verify_assumption(make_power_cost(m, 1.0), m, box, 33).violations.empty());
        }
    }
}

TEST(VerifyAssumption, Rejections) {
    const auto j = make_power_cost(4, 1.0);
    EXPECT_THROW(verify_assumption(j, 4, Box{{1}, {1}}, 5), std::invalid_argument);
    EXPECT_THROW(verify_assumption(j, 4, Box{{0}, {2}}, 2), std::invalid_argument);
    EXPECT_THROW(verify_assumption(j, 4, Box{{1}, {2}}, 5), std::invalid_argument);
}
