#pragma once

// Closed-loop extremum seeking simulation
//
//   x_i' = g1(J(x)) u_{1i}(t) + g2(J(x)) u_{2i}(t),   i = 1..n
//
// integrated with fixed-step classical RK4.  The step is h = eps / P with
// P = N * kappa_max * steps_per_fast_period, so every RK4 stage time falls on
// one of 2P phase points of the base period.  Dither values are tabulated on
// those points once; time is tracked as an integer step counter, which makes
// argument reduction exact for any horizon.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbes/cost.hpp"
#include "lbes/dither.hpp"

namespace lbes {

inline constexpr double kDivergenceThreshold = 1e12;
inline constexpr std::size_t kMaxRecordedSamples = 1'000'000;

struct ESConfig {
    CostModel model;
    VectorFieldPair pair;
    DitherSpec spec;
    Point x0;
    double horizon = 1.0;
    int steps_per_fast_period = 64;
    std::size_t record_stride = 0;  ///< 0: whole periods, sized to keep <= 1e6 samples

    [[nodiscard]] double epsilon() const noexcept { return spec.epsilon; }

    /// RK4 steps per base period eps.
    [[nodiscard]] std::int64_t steps_per_period() const noexcept {
        return static_cast<std::int64_t>(spec.order) * spec.max_kappa() * steps_per_fast_period;
    }
    [[nodiscard]] double step() const noexcept { return spec.epsilon / static_cast<double>(steps_per_period()); }

    [[nodiscard]] std::int64_t total_steps() const noexcept {
        return static_cast<std::int64_t>(std::llround(horizon / step()));
    }

    [[nodiscard]] std::size_t effective_stride() const noexcept {
        if (record_stride > 0) return record_stride;
        const auto per = static_cast<std::size_t>(steps_per_period());
        const auto periods = static_cast<std::size_t>(std::ceil(horizon / spec.epsilon));
        const std::size_t k = std::max<std::size_t>(1, (periods + kMaxRecordedSamples - 2) / (kMaxRecordedSamples - 1));
        return per * k;
    }

    void validate() const {
        if (spec.pairs.size() != model.dimension())
            throw std::invalid_argument("ESConfig: dither spec has " + std::to_string(spec.pairs.size()) +
                                        " pairs for a " + std::to_string(model.dimension()) + "-dimensional cost");
        if (x0.size() != model.dimension()) throw std::invalid_argument("ESConfig: initial state has wrong dimension");
        if (!(spec.epsilon > 0.0)) throw std::invalid_argument("ESConfig: epsilon must be positive");
        if (spec.order < 1) throw std::invalid_argument("ESConfig: order must be >= 1");
        if (steps_per_fast_period < 16) throw std::invalid_argument("ESConfig: steps_per_fast_period must be >= 16");
        if (!(horizon >= spec.epsilon)) throw std::invalid_argument("ESConfig: horizon must be >= epsilon");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Point> states;
    std::vector<double> costs;
    bool diverged = false;
    double divergence_time = std::numeric_limits<double>::quiet_NaN();
    std::shared_ptr<const ESConfig> meta;  ///< configuration that produced the run, if any

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
};

namespace detail {

/// amplitude * waveform at the 2P half-step phases of one base period, per coordinate and channel.
struct DitherTable {
    std::int64_t half_points = 0;      // 2P
    std::vector<double> first, second; // [coordinate * 2P + phase]

    DitherTable(const DitherSpec& spec, std::int64_t steps_per_period) : half_points(2 * steps_per_period) {
        const std::size_t n = spec.pairs.size();
        first.resize(n * static_cast<std::size_t>(half_points));
        second.resize(n * static_cast<std::size_t>(half_points));
        for (std::size_t i = 0; i < n; ++i) {
            fill(spec.pairs[i].first, spec.epsilon, &first[i * static_cast<std::size_t>(half_points)]);
            fill(spec.pairs[i].second, spec.epsilon, &second[i * static_cast<std::size_t>(half_points)]);
        }
    }

    void fill(const DitherChannel& ch, double epsilon, double* out) const {
        const double amp = ch.amplitude(epsilon);
        for (std::int64_t j = 0; j < half_points; ++j) {
            // exact reduction of harmonic * j modulo 2P before scaling to radians
            const std::int64_t r = (static_cast<std::int64_t>(ch.harmonic()) * j) % half_points;
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(half_points);
            out[j] = amp * (ch.waveform == Waveform::cosine ? std::cos(phase) : std::sin(phase));
        }
    }
};

template <typename G1, typename G2>
class Integrator {
public:
    Integrator(const ESConfig& cfg, G1 g1, G2 g2)
        : cfg_(cfg),
          g1_(g1),
          g2_(g2),
          n_(cfg.model.dimension()),
          per_(cfg.steps_per_period()),
          h_(cfg.step()),
          table_(cfg.spec, per_),
          k1_(n_),
          k2_(n_),
          k3_(n_),
          k4_(n_),
          tmp_(n_) {}

    /// x' at state x and half-step phase index j (0 <= j < 2P).
    void rhs(const Point& x, std::int64_t j, Point& dx) const {
        const double z = cfg_.model.evaluate(x);
        const double a = g1_(z), b = g2_(z);
        const auto stride = static_cast<std::size_t>(table_.half_points);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t k = i * stride + static_cast<std::size_t>(j);
            dx[i] = a * table_.first[k] + b * table_.second[k];
        }
    }

    /// One RK4 step from global step index `step`.
    void advance(Point& x, std::int64_t step) {
        const std::int64_t j0 = (2 * step) % table_.half_points;
        const std::int64_t jm = j0 + 1;
        const std::int64_t j1 = (j0 + 2) % table_.half_points;
        rhs(x, j0, k1_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * h_ * k1_[i];
        rhs(tmp_, jm, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * h_ * k2_[i];
        rhs(tmp_, jm, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + h_ * k3_[i];
        rhs(tmp_, j1, k4_);
        for (std::size_t i = 0; i < n_; ++i) x[i] += h_ / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

    [[nodiscard]] double step() const noexcept { return h_; }

private:
    const ESConfig& cfg_;
    G1 g1_;
    G2 g2_;
    std::size_t n_;
    std::int64_t per_;
    double h_;
    DitherTable table_;
    Point k1_, k2_, k3_, k4_, tmp_;
};

inline bool diverging(const Point& x) {
    for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > kDivergenceThreshold) return true;
    return false;
}

/// Calls fn(integrator) with g1/g2 resolved to concrete callables for the pair kind.
template <typename Fn>
decltype(auto) with_integrator(const ESConfig& cfg, Fn&& fn) {
    const double sigma = cfg.pair.sigma;
    switch (cfg.pair.kind) {
        case PairKind::standard: {
            Integrator it(cfg, [](double) { return 1.0; }, [sigma](double z) { return -sigma * z; });
            return fn(it);
        }
        case PairKind::gradient: {
            Integrator it(cfg, [sigma](double z) { return sigma * z; }, [](double) { return 1.0; });
            return fn(it);
        }
        case PairKind::custom:
        default: {
            const auto* pair = &cfg.pair;
            Integrator it(cfg, [pair](double z) { return pair->custom_g1(z); },
                          [pair](double z) { return pair->custom_g2(z); });
            return fn(it);
        }
    }
}

}  // namespace detail

/// Fixed-step RK4 run over [0, horizon].  Stops early, with `diverged` set,
/// when a coordinate leaves |x| <= 1e12 or becomes non-finite.
inline Trajectory simulate(const ESConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.meta = std::make_shared<const ESConfig>(cfg);
    const std::int64_t steps = cfg.total_steps();
    const auto stride = static_cast<std::int64_t>(cfg.effective_stride());
    const std::size_t expected = static_cast<std::size_t>(steps / stride) + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.costs.reserve(expected);

    detail::with_integrator(cfg, [&](auto& it) {
        Point x = cfg.x0;
        const double h = it.step();
        auto record = [&](std::int64_t n) {
            traj.times.push_back(static_cast<double>(n) * h);
            traj.states.push_back(x);
            traj.costs.push_back(cfg.model.evaluate(x));
        };
        record(0);
        for (std::int64_t n = 0; n < steps; ++n) {
            it.advance(x, n);
            if (detail::diverging(x)) {
                traj.diverged = true;
                traj.divergence_time = static_cast<double>(n + 1) * h;
                return;
            }
            if ((n + 1) % stride == 0 || n + 1 == steps) record(n + 1);
        }
    });
    return traj;
}

/// State after exactly one base period [0, eps] starting from x0.
inline Point one_period_map(const ESConfig& cfg, const Point& x0) {
    ESConfig local = cfg;
    local.x0 = x0;
    local.horizon = cfg.epsilon();
    local.validate();
    return detail::with_integrator(local, [&](auto& it) {
        Point x = x0;
        const std::int64_t per = local.steps_per_period();
        for (std::int64_t n = 0; n < per; ++n) {
            it.advance(x, n);
            if (detail::diverging(x)) throw std::runtime_error("one_period_map: state diverged");
        }
        return x;
    });
}

/// Largest |x(t) - x0| over the RK4 nodes of one base period.
inline double period_excursion(const ESConfig& cfg, const Point& x0) {
    ESConfig local = cfg;
    local.x0 = x0;
    local.horizon = cfg.epsilon();
    local.validate();
    return detail::with_integrator(local, [&](auto& it) {
        Point x = x0;
        double worst = 0.0;
        for (std::int64_t n = 0; n < local.steps_per_period(); ++n) {
            it.advance(x, n);
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - x0[i]) * (x[i] - x0[i]);
            worst = std::max(worst, std::sqrt(d2));
        }
        return worst;
    });
}

/// |x'(0)| for the configured initial state.
inline double initial_speed(const ESConfig& cfg) {
    cfg.validate();
    return detail::with_integrator(cfg, [&](auto& it) {
        Point dx(cfg.x0.size());
        it.rhs(cfg.x0, 0, dx);
        double s = 0.0;
        for (double v : dx) s += v * v;
        return std::sqrt(s);
    });
}

/// Euclidean distance of the last recorded state from the model's minimizer.
inline double final_error(const Trajectory& traj) {
    if (traj.empty()) throw std::invalid_argument("final_error: empty trajectory");
    if (!traj.meta) throw std::invalid_argument("final_error: trajectory carries no configuration");
    const auto& x = traj.states.back();
    const auto& xs = traj.meta->model.minimizer();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - xs[i]) * (x[i] - xs[i]);
    return std::sqrt(s);
}

}  // namespace lbes
