#pragma once

// Iterated Lie derivatives of the scalar composed fields g_k(J(x)) on R.
//
// For a scalar state, L_f h = h' f.  A word (k_1, ..., k_{l+1}) denotes
// L_{g_{k_{l+1}}} ... L_{g_{k_2}} g_{k_1}; k_1 is the innermost field.
//
// Pairs that are polynomial in J (standard, gradient) are evaluated exactly on
// truncated Taylor jets built from the model's exact derivatives.  Custom pairs
// fall back to nested central differences and are supported up to length 4.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lbes/cost.hpp"

namespace lbes {

/// Channel indices, innermost field first.
using LieWord = std::vector<int>;

/// Longest word accepted when derivatives come from finite differences.
inline constexpr std::size_t kMaxFiniteDifferenceWord = 4;

namespace detail {

/// Taylor coefficients a_k = f^{(k)}(x0) / k!, truncated.
class Jet {
public:
    explicit Jet(std::size_t order, double constant = 0.0) : c_(order + 1, 0.0) { c_[0] = constant; }

    [[nodiscard]] std::size_t order() const noexcept { return c_.size() - 1; }
    [[nodiscard]] double value() const noexcept { return c_[0]; }
    double& operator[](std::size_t k) { return c_[k]; }
    double operator[](std::size_t k) const { return c_[k]; }

    [[nodiscard]] Jet derivative() const {
        Jet d(order() == 0 ? 0 : order() - 1);
        if (order() == 0) return d;
        for (std::size_t k = 0; k + 1 < c_.size(); ++k) d.c_[k] = static_cast<double>(k + 1) * c_[k + 1];
        return d;
    }

    friend Jet operator*(const Jet& a, const Jet& b) {
        const std::size_t n = std::min(a.order(), b.order());
        Jet r(n);
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; i + j <= n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        return r;
    }
    friend Jet operator-(const Jet& a, const Jet& b) {
        const std::size_t n = std::min(a.order(), b.order());
        Jet r(n);
        for (std::size_t i = 0; i <= n; ++i) r.c_[i] = a.c_[i] - b.c_[i];
        return r;
    }
    friend Jet operator*(double s, Jet a) {
        for (auto& v : a.c_) v *= s;
        return a;
    }

private:
    std::vector<double> c_;
};

inline Jet cost_jet(const CostModel& model, double x, std::size_t order) {
    Jet j(order);
    double fact = 1.0;
    for (std::size_t k = 0; k <= order; ++k) {
        if (k > 0) fact *= static_cast<double>(k);
        j[k] = model.derivative(static_cast<int>(k), x) / fact;
    }
    return j;
}

inline Jet composed_jet(const VectorFieldPair& pair, int channel, const Jet& cost) {
    const bool linear = (pair.kind == PairKind::standard && channel == 2) ||
                        (pair.kind == PairKind::gradient && channel == 1);
    if (linear) return (channel == 2 ? -pair.sigma : pair.sigma) * cost;
    return Jet(cost.order(), 1.0);
}

inline void check_word(const LieWord& word) {
    if (word.empty()) throw std::invalid_argument("LieWord: length must be >= 1");
    for (int k : word)
        if (k != 1 && k != 2) throw std::invalid_argument("LieWord: channel indices must be 1 or 2");
}

inline void check_smoothness(const VectorFieldPair& pair, const CostModel& model, std::size_t length) {
    if (model.dimension() != 1) throw std::invalid_argument("bracket engine: cost model must be one-dimensional");
    const bool finite_diff = pair.kind == PairKind::custom || !model.exact_derivatives();
    if (finite_diff && length > kMaxFiniteDifferenceWord)
        throw std::invalid_argument("bracket engine: word of length " + std::to_string(length) +
                                    " exceeds finite-difference smoothness (max " +
                                    std::to_string(kMaxFiniteDifferenceWord) + ")");
}

/// Step for a nest of `depth` first differences.
inline double nested_step(std::size_t depth, double x) {
    return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (static_cast<double>(depth) + 2.0)) *
           std::max(1.0, std::abs(x));
}

using ScalarFn = std::function<double(double)>;

inline ScalarFn fd_derivative(ScalarFn f, double h) {
    return [f = std::move(f), h](double x) { return (f(x + 0.5 * h) - f(x - 0.5 * h)) / h; };
}

inline ScalarFn composed_fn(const VectorFieldPair& pair, int channel, const CostModel& model) {
    return [&pair, &model, channel](double x) { return pair.g(channel, model.evaluate(x)); };
}

inline bool use_jets(const VectorFieldPair& pair, const CostModel& model) {
    return pair.kind != PairKind::custom && model.exact_derivatives();
}

}  // namespace detail

/// Value at x of the iterated Lie derivative named by `word`.
inline double lie_derivative_word(const LieWord& word, const VectorFieldPair& pair, const CostModel& model,
                                  double x) {
    detail::check_word(word);
    detail::check_smoothness(pair, model, word.size());
    const std::size_t depth = word.size() - 1;

    if (detail::use_jets(pair, model)) {
        const auto cost = detail::cost_jet(model, x, depth);
        auto h = detail::composed_jet(pair, word[0], cost);
        for (std::size_t j = 1; j < word.size(); ++j) h = h.derivative() * detail::composed_jet(pair, word[j], cost);
        return h.value();
    }

    const double step = detail::nested_step(depth, x);
    detail::ScalarFn h = detail::composed_fn(pair, word[0], model);
    for (std::size_t j = 1; j < word.size(); ++j) {
        auto dh = detail::fd_derivative(h, step);
        auto g = detail::composed_fn(pair, word[j], model);
        h = [dh = std::move(dh), g = std::move(g)](double s) { return dh(s) * g(s); };
    }
    return h(x);
}

/// Word with channel 2 at (0-based) position k and channel 1 elsewhere, length N+1.
inline LieWord single_second_channel_word(int order, int k) {
    LieWord w(static_cast<std::size_t>(order) + 1, 1);
    w[static_cast<std::size_t>(k)] = 2;
    return w;
}

/// ad_{g1}^N g2 at x as the alternating binomial sum
///   sum_k (-1)^k C(N,k) L_{g1}^{N-k} L_{g2} L_{g1}^k,
/// where the k = 0 term is L_{g1}^N g2 and, for k >= 1, the innermost field is g1.
inline double ad_bracket(int order, const VectorFieldPair& pair, const CostModel& model, double x) {
    if (order < 1) throw std::invalid_argument("ad_bracket: order must be >= 1");
    double sum = 0.0;
    for (int k = 0; k <= order; ++k) {
        const double term = lie_derivative_word(single_second_channel_word(order, k), pair, model, x);
        sum += ((k % 2) ? -1.0 : 1.0) * detail::binomial(order, k) * term;
    }
    return sum;
}

/// ad_{g1}^N g2 at x by nesting [g1, b] = b' g1 - (g1)' b one level at a time.
inline double ad_bracket_recursive(int order, const VectorFieldPair& pair, const CostModel& model, double x) {
    if (order < 1) throw std::invalid_argument("ad_bracket_recursive: order must be >= 1");
    detail::check_smoothness(pair, model, static_cast<std::size_t>(order) + 1);
    const auto depth = static_cast<std::size_t>(order);

    if (detail::use_jets(pair, model)) {
        const auto cost = detail::cost_jet(model, x, depth);
        const auto g1 = detail::composed_jet(pair, 1, cost);
        auto b = detail::composed_jet(pair, 2, cost);
        for (int level = 0; level < order; ++level) b = b.derivative() * g1 - g1.derivative() * b;
        return b.value();
    }

    const double step = detail::nested_step(depth, x);
    auto g1 = detail::composed_fn(pair, 1, model);
    auto dg1 = detail::fd_derivative(g1, step);
    detail::ScalarFn b = detail::composed_fn(pair, 2, model);
    for (int level = 0; level < order; ++level) {
        auto db = detail::fd_derivative(b, step);
        b = [db = std::move(db), g1, dg1, b](double s) { return db(s) * g1(s) - dg1(s) * b(s); };
    }
    return b(x);
}

/// First-order bracket of two composed fields in either order: [h1, h2] = h2' h1 - h1' h2.
inline double composed_bracket(int first, int second, const VectorFieldPair& pair, const CostModel& model, double x) {
    return lie_derivative_word({second, first}, pair, model, x) - lie_derivative_word({first, second}, pair, model, x);
}

}  // namespace lbes
