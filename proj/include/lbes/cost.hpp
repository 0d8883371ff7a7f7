#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lbes {

using Point = std::vector<double>;

/// How a cost model was built; used to serialize experiment configurations.
struct CostDescriptor {
    std::string name = "custom";  ///< "power", "quartic2d" or "custom"
    int m = 0;
    double x_star = 0.0;
    bool normalized = true;

    friend bool operator==(const CostDescriptor&, const CostDescriptor&) = default;
};

namespace detail {

inline double ipow(double base, int exp) {
    double r = 1.0;
    while (exp > 0) {
        if (exp & 1) r *= base;
        base *= base;
        exp >>= 1;
    }
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

/// Step for an order-k central difference: eps^{1/(k+2)} * max(1, |x|).
inline double fd_step(int order, double x, double scale = 1.0) {
    return scale * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 2)) *
           std::max(1.0, std::abs(x));
}

/// Order-k central difference of a scalar function (k+1 nodes; half-integer
/// offsets for odd k), second-order accurate.
template <typename F>
double central_difference(F&& f, double x, int order, double h) {
    if (order == 0) return f(x);
    double sum = 0.0;
    for (int j = 0; j <= order; ++j) {
        const double offset = 0.5 * order - j;
        const double w = binomial(order, j) * ((j % 2) ? -1.0 : 1.0);
        sum += w * f(x + offset * h);
    }
    return sum / ipow(h, order);
}

}  // namespace detail

/// Scalar cost J on R^n with pure partial derivatives d^k J / dx_i^k.
class CostModel {
public:
    using Evaluate = std::function<double(std::span<const double>)>;
    using Partial = std::function<double(std::size_t, int, std::span<const double>)>;

    CostModel(std::size_t dimension, Evaluate evaluate, Partial partial, Point minimizer, double minimum,
              CostDescriptor descriptor = {})
        : dim_(dimension),
          eval_(std::move(evaluate)),
          partial_(std::move(partial)),
          x_star_(std::move(minimizer)),
          j_star_(minimum),
          desc_(std::move(descriptor)) {
        if (dim_ == 0) throw std::invalid_argument("CostModel: dimension must be positive");
        if (x_star_.size() != dim_) throw std::invalid_argument("CostModel: minimizer has wrong dimension");
        if (!eval_) throw std::invalid_argument("CostModel: evaluate is empty");
        if (!partial_) {
            // finite-difference fallback
            partial_ = [ev = eval_](std::size_t i, int k, std::span<const double> x) {
                Point work(x.begin(), x.end());
                const double xi = x[i];
                auto along = [&](double s) {
                    work[i] = s;
                    return ev(work);
                };
                return detail::central_difference(along, xi, k, detail::fd_step(k, xi));
            };
            exact_ = false;
        }
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] const Point& minimizer() const noexcept { return x_star_; }
    [[nodiscard]] double minimum() const noexcept { return j_star_; }
    [[nodiscard]] const CostDescriptor& descriptor() const noexcept { return desc_; }
    /// False when partials come from finite differences.
    [[nodiscard]] bool exact_derivatives() const noexcept { return exact_; }

    double operator()(std::span<const double> x) const { return eval_(x); }
    double evaluate(std::span<const double> x) const { return eval_(x); }
    double evaluate(double x) const { return eval_(std::span<const double>(&x, 1)); }

    double partial_derivative(std::size_t i, int order, std::span<const double> x) const {
        if (i >= dim_) throw std::out_of_range("CostModel: coordinate index out of range");
        if (order < 0) throw std::invalid_argument("CostModel: negative derivative order");
        return partial_(i, order, x);
    }
    /// k-th derivative of a one-dimensional model.
    double derivative(int order, double x) const { return partial_derivative(0, order, std::span<const double>(&x, 1)); }

private:
    std::size_t dim_;
    Evaluate eval_;
    Partial partial_;
    Point x_star_;
    double j_star_;
    CostDescriptor desc_;
    bool exact_ = true;
};

/// J(x) = (x - x*)^m / m!  (or (x - x*)^m when not normalized).
inline CostModel make_power_cost(int m, double x_star, bool normalized = true) {
    if (m < 2) throw std::invalid_argument("make_power_cost: m must be >= 2");
    const double scale = normalized ? 1.0 / detail::factorial(m) : 1.0;
    auto eval = [=](std::span<const double> x) { return scale * detail::ipow(x[0] - x_star, m); };
    auto partial = [=](std::size_t, int k, std::span<const double> x) {
        if (k > m) return 0.0;
        // m!/(m-k)! * scale * (x - x*)^{m-k}
        double falling = 1.0;
        for (int j = 0; j < k; ++j) falling *= (m - j);
        return scale * falling * detail::ipow(x[0] - x_star, m - k);
    };
    return CostModel(1, eval, partial, {x_star}, 0.0, CostDescriptor{"power", m, x_star, normalized});
}

/// J(x) = (x1 - 1)^4 + (x1 - x2)^4, minimized at (1, 1).
inline CostModel make_quartic_2d() {
    auto eval = [](std::span<const double> x) {
        const double u = x[0] - 1.0, d = x[0] - x[1];
        return detail::ipow(u, 4) + detail::ipow(d, 4);
    };
    auto partial = [](std::size_t i, int k, std::span<const double> x) {
        if (k > 4) return 0.0;
        const double u = x[0] - 1.0, d = x[0] - x[1];
        double falling = 1.0;
        for (int j = 0; j < k; ++j) falling *= (4 - j);
        if (i == 0) return falling * (detail::ipow(u, 4 - k) + detail::ipow(d, 4 - k));
        return falling * ((k % 2) ? -1.0 : 1.0) * detail::ipow(d, 4 - k);
    };
    return CostModel(2, eval, partial, {1.0, 1.0}, 0.0, CostDescriptor{"quartic2d", 4, 1.0, false});
}

/// Cost known only through evaluations; partials by central differences.
inline CostModel make_sampled_cost(std::size_t dimension, CostModel::Evaluate f, Point minimizer, double minimum) {
    return CostModel(dimension, std::move(f), nullptr, std::move(minimizer), minimum);
}

/// J(x) = sum_i J_i(x_i) from one-dimensional parts; partials are exact when the parts' are.
inline CostModel make_separable(std::vector<CostModel> parts) {
    if (parts.empty()) throw std::invalid_argument("make_separable: no parts");
    Point x_star;
    double j_star = 0.0;
    for (const auto& p : parts) {
        if (p.dimension() != 1) throw std::invalid_argument("make_separable: parts must be one-dimensional");
        x_star.push_back(p.minimizer()[0]);
        j_star += p.minimum();
    }
    auto eval = [parts](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) s += parts[i].evaluate(x[i]);
        return s;
    };
    auto partial = [parts](std::size_t i, int k, std::span<const double> x) {
        if (k == 0) {
            double s = 0.0;
            for (std::size_t j = 0; j < parts.size(); ++j) s += parts[j].evaluate(x[j]);
            return s;
        }
        return parts[i].derivative(k, x[i]);
    };
    const std::size_t n = parts.size();
    return CostModel(n, eval, partial, x_star, j_star);
}

// ---------------------------------------------------------------------------
// Generating vector fields
// ---------------------------------------------------------------------------

enum class PairKind {
    standard,  ///< g1(z) = 1, g2(z) = -sigma z
    gradient,  ///< g1(z) = sigma z, g2(z) = 1 (first-order law; matches -sigma J' for N = 1 only)
    custom
};

inline const char* to_string(PairKind k) noexcept {
    switch (k) {
        case PairKind::standard: return "standard";
        case PairKind::gradient: return "gradient";
        case PairKind::custom: return "custom";
    }
    return "custom";
}

/// The scalar functions g1, g2 composed with J in x' = g1(J) u1 + g2(J) u2.
struct VectorFieldPair {
    PairKind kind = PairKind::standard;
    double sigma = 1.0;
    std::function<double(double)> custom_g1;
    std::function<double(double)> custom_g2;

    [[nodiscard]] double g1(double z) const {
        switch (kind) {
            case PairKind::standard: return 1.0;
            case PairKind::gradient: return sigma * z;
            case PairKind::custom: return custom_g1(z);
        }
        return 0.0;
    }
    [[nodiscard]] double g2(double z) const {
        switch (kind) {
            case PairKind::standard: return -sigma * z;
            case PairKind::gradient: return 1.0;
            case PairKind::custom: return custom_g2(z);
        }
        return 0.0;
    }
    [[nodiscard]] double g(int channel, double z) const { return channel == 1 ? g1(z) : g2(z); }

    /// Whether ad_{g1}^N g2 (J) = -sigma J^{(N)} holds identically for this pair.
    [[nodiscard]] bool matches_derivative(int order) const noexcept {
        return kind == PairKind::standard || (kind == PairKind::gradient && order == 1);
    }
};

inline VectorFieldPair default_pair(double sigma = 1.0) {
    if (!(sigma > 0.0)) throw std::invalid_argument("default_pair: sigma must be positive");
    return VectorFieldPair{PairKind::standard, sigma, {}, {}};
}

inline VectorFieldPair gradient_pair(double sigma = 1.0) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gradient_pair: sigma must be positive");
    return VectorFieldPair{PairKind::gradient, sigma, {}, {}};
}

inline VectorFieldPair custom_pair(std::function<double(double)> g1, std::function<double(double)> g2) {
    return VectorFieldPair{PairKind::custom, 1.0, std::move(g1), std::move(g2)};
}

// ---------------------------------------------------------------------------
// Assumption checks on a grid
// ---------------------------------------------------------------------------

struct Box {
    Point lower;
    Point upper;
};

struct AssumptionReport {
    int m = 0;
    std::string sampling;  ///< e.g. "41x41 grid over [-1,3]x[-1,3]"
    std::size_t samples = 0;
    double alpha1 = 0.0;  ///< min (J - J*) / |x - x*|^m
    double alpha2 = 0.0;  ///< max of the same ratio
    double beta1 = 0.0;   ///< min sum_i d^{m-1}J/dx_i^{m-1} (x_i - x_i*) / |x - x*|^2
    double beta2 = 0.0;   ///< max sum_i |d^{m-1}J/dx_i^{m-1}| / |x - x*|
    std::vector<Point> violations;  ///< samples where the beta1 numerator is <= 0
};

/// Sampled estimates of the growth constants of a degree-m flat-bottomed cost.
inline AssumptionReport verify_assumption(const CostModel& model, int m, const Box& box, int grid) {
    const std::size_t n = model.dimension();
    if (box.lower.size() != n || box.upper.size() != n)
        throw std::invalid_argument("verify_assumption: box dimension mismatch");
    if (grid < 3) throw std::invalid_argument("verify_assumption: need at least 3 grid points per axis");
    if (m < 2) throw std::invalid_argument("verify_assumption: m must be >= 2");
    const auto& xs = model.minimizer();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(box.upper[i] > box.lower[i])) throw std::invalid_argument("verify_assumption: degenerate box");
        if (!(xs[i] > box.lower[i] && xs[i] < box.upper[i]))
            throw std::invalid_argument("verify_assumption: minimizer must lie strictly inside the box");
    }

    AssumptionReport rep;
    rep.m = m;
    {
        std::string dims, ranges;
        for (std::size_t i = 0; i < n; ++i) {
            dims += (i ? "x" : "") + std::to_string(grid);
            ranges += (i ? "x[" : "[") + std::to_string(box.lower[i]) + "," + std::to_string(box.upper[i]) + "]";
        }
        rep.sampling = dims + " grid over " + ranges;
    }
    rep.alpha1 = rep.beta1 = std::numeric_limits<double>::infinity();
    rep.alpha2 = rep.beta2 = -std::numeric_limits<double>::infinity();

    std::vector<int> idx(n, 0);
    Point x(n);
    const double j_star = model.minimum();
    while (true) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * idx[i] / (grid - 1);
            r2 += (x[i] - xs[i]) * (x[i] - xs[i]);
        }
        if (r2 > 0.0) {
            const double r = std::sqrt(r2);
            ++rep.samples;
            const double ratio = (model.evaluate(x) - j_star) / std::pow(r, m);
            double inner = 0.0, abs_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = model.partial_derivative(i, m - 1, x);
                inner += d * (x[i] - xs[i]);
                abs_sum += std::abs(d);
            }
            rep.alpha1 = std::min(rep.alpha1, ratio);
            rep.alpha2 = std::max(rep.alpha2, ratio);
            rep.beta1 = std::min(rep.beta1, inner / r2);
            rep.beta2 = std::max(rep.beta2, abs_sum / r);
            if (inner <= 0.0) rep.violations.push_back(x);
        }
        std::size_t d = 0;
        while (d < n && ++idx[d] == grid) idx[d++] = 0;
        if (d == n) break;
    }
    return rep;
}

}  // namespace lbes
