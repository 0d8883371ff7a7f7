#pragma once

// Convergence diagnostics for ES trajectories.
//
// Trajectories oscillate with period eps around an averaged decay, so rates are
// fitted to a windowed envelope (max of |x - x*| per window) rather than to raw
// samples.  Two decay models are fitted by least squares in log space:
//
//   exponential   e(t) - rho = lambda exp(-gamma t)
//   polynomial    e(t) - rho = A t^slope
//
// and compared by R^2 on a common window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lbes/simulator.hpp"

namespace lbes {

struct EnvelopePoint {
    double t = 0.0;
    double e = 0.0;
};

using Envelope = std::vector<EnvelopePoint>;

enum class DecayKind { exponential, polynomial };

inline const char* to_string(DecayKind k) noexcept { return k == DecayKind::exponential ? "exponential" : "polynomial"; }

struct DecayFit {
    DecayKind kind = DecayKind::exponential;
    double rate = 0.0;       ///< gamma (exponential) or log-log slope (polynomial)
    double prefactor = 0.0;  ///< lambda' or A
    double floor = 0.0;      ///< rho
    double r_squared = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t points = 0;
};

/// Explicit fit window; unset bounds fall back to the automatic choice.
struct FitWindow {
    std::optional<double> t_start;
    std::optional<double> t_end;
};

struct FitOptions {
    double floor_quantile = 0.1;
    double tail_fraction = 0.2;       ///< floor estimated over this trailing share of the envelope
    std::size_t skip_leading = 5;     ///< transient points dropped by the automatic window
    double floor_exclusion = 3.0;     ///< drop points with e < floor_exclusion * rho
    FitWindow window;
};

inline constexpr std::size_t kMinFitPoints = 10;

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (window midpoint, max |x - x*|) over consecutive windows [k w, (k+1) w).
inline Envelope envelope(const Trajectory& traj, const Point& x_star, double window_width) {
    if (traj.empty()) throw std::invalid_argument("envelope: empty trajectory");
    if (!(window_width > 0.0)) throw std::invalid_argument("envelope: window width must be positive");
    if (traj.meta && window_width < traj.meta->epsilon())
        throw std::invalid_argument("envelope: window width is shorter than the dither period");
    if (traj.states.front().size() != x_star.size()) throw std::invalid_argument("envelope: x_star dimension mismatch");

    Envelope env;
    long long current = -1;
    double worst = 0.0;
    auto flush = [&] {
        if (current >= 0) env.push_back({(static_cast<double>(current) + 0.5) * window_width, worst});
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        // small tolerance so samples on a window boundary land in the later window
        const auto idx = static_cast<long long>(std::floor(traj.times[k] / window_width + 1e-9));
        if (idx != current) {
            flush();
            current = idx;
            worst = 0.0;
        }
        double d2 = 0.0;
        const auto& x = traj.states[k];
        for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - x_star[i]) * (x[i] - x_star[i]);
        worst = std::max(worst, std::sqrt(d2));
    }
    flush();
    return env;
}

namespace detail {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw FitError("least squares: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return f;
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw FitError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

/// Floor rho: the floor_quantile of the last tail_fraction of the envelope.
inline double estimate_floor(const Envelope& env, const FitOptions& opt = {}) {
    if (env.empty()) throw FitError("estimate_floor: empty envelope");
    if (!(opt.floor_quantile > 0.0 && opt.floor_quantile < 1.0))
        throw std::invalid_argument("estimate_floor: quantile must lie in (0, 1)");
    const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.tail_fraction * env.size())));
    std::vector<double> values;
    for (std::size_t i = env.size() - tail; i < env.size(); ++i) values.push_back(env[i].e);
    return detail::quantile(std::move(values), opt.floor_quantile);
}

/// Indices of envelope points used for fitting: explicit window if given,
/// otherwise skip the leading transient and points within floor_exclusion of rho.
inline std::vector<std::size_t> fit_indices(const Envelope& env, double floor, const FitOptions& opt) {
    std::vector<std::size_t> idx;
    const bool explicit_window = opt.window.t_start || opt.window.t_end;
    for (std::size_t i = 0; i < env.size(); ++i) {
        const auto& p = env[i];
        if (opt.window.t_start && p.t < *opt.window.t_start) continue;
        if (opt.window.t_end && p.t > *opt.window.t_end) continue;
        if (!explicit_window && i < opt.skip_leading) continue;
        if (!explicit_window && p.e < opt.floor_exclusion * floor) continue;
        if (!(p.e - floor > 0.0)) continue;
        idx.push_back(i);
    }
    return idx;
}

/// Exponential decay fit log(e - rho) = log lambda' - gamma t.
inline DecayFit fit_exponential(const Envelope& env, const FitOptions& opt = {}) {
    const double rho = estimate_floor(env, opt);
    const auto idx = fit_indices(env, rho, opt);
    if (idx.size() < kMinFitPoints)
        throw FitError("fit_exponential: only " + std::to_string(idx.size()) + " usable envelope points above floor " +
                       std::to_string(rho) + " (need " + std::to_string(kMinFitPoints) + ")");
    std::vector<double> t, y;
    for (auto i : idx) {
        t.push_back(env[i].t);
        y.push_back(std::log(env[i].e - rho));
    }
    const auto line = detail::least_squares(t, y);
    return DecayFit{DecayKind::exponential, -line.slope, std::exp(line.intercept), rho, line.r_squared,
                    t.front(), t.back(), idx.size()};
}

/// Power-law fit log(e - floor) = log A + slope log t over t > 0.
///
/// Without an explicit window the leading transient is skipped; `floor`
/// defaults to zero.
inline DecayFit fit_polynomial(const Envelope& env, const FitWindow& window = {}, double floor = 0.0,
                               std::size_t skip_leading = 5) {
    std::vector<double> lt, ly;
    double t0 = 0.0, t1 = 0.0;
    const bool explicit_window = window.t_start || window.t_end;
    for (std::size_t i = 0; i < env.size(); ++i) {
        const auto& p = env[i];
        if (window.t_start && p.t < *window.t_start) continue;
        if (window.t_end && p.t > *window.t_end) continue;
        if (!explicit_window && i < skip_leading) continue;
        if (!(p.t > 0.0) || !(p.e - floor > 0.0)) continue;
        if (lt.empty()) t0 = p.t;
        t1 = p.t;
        lt.push_back(std::log(p.t));
        ly.push_back(std::log(p.e - floor));
    }
    if (lt.size() < kMinFitPoints)
        throw FitError("fit_polynomial: only " + std::to_string(lt.size()) + " usable envelope points (need " +
                       std::to_string(kMinFitPoints) + ")");
    const auto line = detail::least_squares(lt, ly);
    return DecayFit{DecayKind::polynomial, line.slope, std::exp(line.intercept), floor, line.r_squared, t0, t1,
                    lt.size()};
}

struct ModelComparison {
    DecayFit exponential;
    DecayFit polynomial;  ///< same window and floor as the exponential fit
    [[nodiscard]] DecayKind preferred() const noexcept {
        return exponential.r_squared >= polynomial.r_squared ? DecayKind::exponential : DecayKind::polynomial;
    }
};

inline ModelComparison compare_models(const Envelope& env, const FitOptions& opt = {}) {
    ModelComparison cmp;
    cmp.exponential = fit_exponential(env, opt);
    cmp.polynomial =
        fit_polynomial(env, FitWindow{cmp.exponential.t_start, cmp.exponential.t_end}, cmp.exponential.floor);
    return cmp;
}

// ---------------------------------------------------------------------------
// Remainder order of the one-period map
// ---------------------------------------------------------------------------

struct ResidualEstimate {
    double order = 0.0;               ///< slope of log Delta against log eps
    std::vector<double> epsilons;
    std::vector<double> residuals;    ///< Delta(eps)
    std::vector<double> integrator_errors;
};

/// Delta(eps) = |x(eps) - x0 + eps sigma d^N J/dx_i^N (x0)| for one configuration.
inline double period_residual(const ESConfig& cfg, const Point& x0) {
    const Point x1 = one_period_map(cfg, x0);
    const double eps = cfg.epsilon();
    double s = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        const double drift = -eps * cfg.pair.sigma * cfg.model.partial_derivative(i, cfg.spec.order, x0);
        const double r = x1[i] - x0[i] - drift;
        s += r * r;
    }
    return std::sqrt(s);
}

/// Fits the order of the one-period remainder across a family of configurations
/// that differ in eps.  Each residual must stand at least 10x above the
/// integrator's own error (estimated by halving the step).
inline ResidualEstimate residual_order(const std::vector<ESConfig>& family, const Point& x0) {
    if (family.size() < 2) throw std::invalid_argument("residual_order: need at least two configurations");
    for (const auto& c : family)
        if (!c.pair.matches_derivative(c.spec.order))
            throw std::invalid_argument("residual_order: pair does not realize -sigma J^(N)");

    ResidualEstimate est;
    for (const auto& c : family) est.epsilons.push_back(c.epsilon());
    auto sorted = est.epsilons;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] < 4.0 * sorted[i - 1])
            throw std::invalid_argument("residual_order: eps values must be separated by at least 4x");

    std::vector<double> lx, ly;
    for (const auto& c : family) {
        const double delta = period_residual(c, x0);
        ESConfig fine = c;
        fine.steps_per_fast_period *= 2;
        const Point a = one_period_map(c, x0), b = one_period_map(fine, x0);
        double err = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) err += (a[i] - b[i]) * (a[i] - b[i]);
        err = std::sqrt(err);
        est.residuals.push_back(delta);
        est.integrator_errors.push_back(err);
        if (!(delta > 10.0 * err))
            throw std::runtime_error("residual_order: residual " + std::to_string(delta) + " at eps=" +
                                     std::to_string(c.epsilon()) + " is within 10x of the integrator error " +
                                     std::to_string(err));
        lx.push_back(std::log(c.epsilon()));
        ly.push_back(std::log(delta));
    }
    est.order = detail::least_squares(lx, ly).slope;
    return est;
}

}  // namespace lbes
