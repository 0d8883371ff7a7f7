#pragma once

// Dither synthesis for high-order bracket excitation.
//
// A two-channel pair (v1, v2) with v1 = cos(2 kappa pi t / eps) and
// v2 = sin or cos(2 N kappa pi t / eps), scaled by eps^{-N/(N+1)} and by
// coefficients c1, c2 with c1^N c2 = (4 pi kappa)^N N! (-1)^{floor(N/2)},
// moves a driftless two-input system along ad_{g1}^N g2 over one period eps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lbes {

enum class Waveform { cosine, sine };

inline const char* to_string(Waveform w) noexcept { return w == Waveform::cosine ? "cos" : "sin"; }

enum class SplitRule {
    equal_magnitude,  ///< |c1| = |c2|, sign carried by c2
    unit_c1           ///< c1 = 1
};

/// One excitation channel: c * eps^{-p} * waveform(2 * multiple * kappa * pi * t / eps).
struct DitherChannel {
    double coefficient = 0.0;
    double exponent = 0.5;  ///< p = N / (N + 1)
    int frequency_multiple = 1;
    Waveform waveform = Waveform::cosine;
    int kappa = 1;

    /// Angular rate of the unit waveform in units of 2*pi/eps.
    [[nodiscard]] int harmonic() const noexcept { return frequency_multiple * kappa; }

    [[nodiscard]] double amplitude(double epsilon) const { return coefficient * std::pow(epsilon, -exponent); }

    friend bool operator==(const DitherChannel&, const DitherChannel&) = default;
};

struct DitherPair {
    DitherChannel first;   ///< multiplies g1(J(x))
    DitherChannel second;  ///< multiplies g2(J(x))

    friend bool operator==(const DitherPair&, const DitherPair&) = default;
};

/// One dither pair per state coordinate, all sharing the design order and period.
struct DitherSpec {
    int order = 1;
    double epsilon = 1.0;
    std::vector<DitherPair> pairs;

    [[nodiscard]] std::size_t dimension() const noexcept { return pairs.size(); }

    /// Largest kappa over all coordinates.
    [[nodiscard]] int max_kappa() const noexcept {
        int k = 1;
        for (const auto& p : pairs) k = std::max({k, p.first.kappa, p.second.kappa});
        return k;
    }

    /// Highest harmonic (multiple * kappa) present in any channel.
    [[nodiscard]] int max_harmonic() const noexcept {
        int h = 1;
        for (const auto& p : pairs) h = std::max({h, p.first.harmonic(), p.second.harmonic()});
        return h;
    }

    friend bool operator==(const DitherSpec&, const DitherSpec&) = default;
};

/// Required product c1^N c2 for a pair exciting ad_{g1}^N g2 with unit gain.
inline double bracket_coefficient(int order, int kappa) {
    if (order < 1 || kappa < 1) throw std::invalid_argument("bracket_coefficient: order and kappa must be >= 1");
    double value = 1.0;
    const double base = 4.0 * std::numbers::pi * kappa;
    for (int i = 1; i <= order; ++i) value *= base * i;
    return (order / 2) % 2 == 0 ? value : -value;
}

/// Waveform required for the second channel: sine for odd N, cosine for even N.
[[nodiscard]] constexpr Waveform second_waveform(int order) noexcept {
    return order % 2 == 1 ? Waveform::sine : Waveform::cosine;
}

/// Value of the unit waveform at time t, with t reduced modulo eps first.
inline double unit_wave(Waveform w, int harmonic, double epsilon, double t) {
    double r = std::fmod(t, epsilon);
    if (r < 0.0) r += epsilon;
    const double phase = 2.0 * std::numbers::pi * harmonic * (r / epsilon);
    return w == Waveform::cosine ? std::cos(phase) : std::sin(phase);
}

inline double eval_dither(const DitherChannel& ch, double epsilon, double t) {
    return ch.amplitude(epsilon) * unit_wave(ch.waveform, ch.harmonic(), epsilon, t);
}

/// Single pair satisfying the coefficient constraint for order N.
inline DitherPair design_pair(int order, int kappa, SplitRule split = SplitRule::equal_magnitude) {
    if (order < 1) throw std::invalid_argument("design_pair: order must be >= 1");
    if (kappa < 1) throw std::invalid_argument("design_pair: kappa must be >= 1");
    const double product = bracket_coefficient(order, kappa);
    const double p = static_cast<double>(order) / (order + 1);

    double c1 = 1.0;
    double c2 = product;
    if (split == SplitRule::equal_magnitude) {
        const double mag = std::pow(std::abs(product), 1.0 / (order + 1));
        c1 = mag;
        c2 = product < 0.0 ? -mag : mag;
    }
    return DitherPair{
        DitherChannel{c1, p, 1, Waveform::cosine, kappa},
        DitherChannel{c2, p, order, second_waveform(order), kappa},
    };
}

inline DitherSpec design_dithers(int order, int kappa, double epsilon,
                                 SplitRule split = SplitRule::equal_magnitude) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("design_dithers: epsilon must be positive");
    return DitherSpec{order, epsilon, {design_pair(order, kappa, split)}};
}

// ---------------------------------------------------------------------------
// Frequency non-resonance
// ---------------------------------------------------------------------------

struct ResonanceTerm {
    int mu = 0;
    int nu = 0;
    friend bool operator==(const ResonanceTerm&, const ResonanceTerm&) = default;
};

/// How a tuple's size is charged against the order budget N.
enum class ResonanceBudget {
    /// sum |mu_i| + N |nu_i| <= N: a second-channel factor carries harmonic N kappa_i
    /// and is charged like N first-channel factors.
    weighted,
    /// sum |mu_i| + |nu_i| <= N, every entry charged 1.
    literal
};

struct ResonanceReport {
    bool passes = true;
    std::optional<std::vector<ResonanceTerm>> witness;  ///< present iff !passes
    std::uint64_t tuples_checked = 0;
};

/// Thrown when the enumeration would exceed the configured tuple budget.
class EnumerationInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Number of integer vectors with sum_j weight_j |v_j| <= budget (saturating at cap + 1).
inline std::uint64_t weighted_ball_size(const std::vector<int>& weights, int budget, std::uint64_t cap) {
    std::vector<std::uint64_t> count(budget + 1, 0);  // count[b]: processed prefix with cost exactly b
    count[0] = 1;
    for (int w : weights) {
        std::vector<std::uint64_t> next(budget + 1, 0);
        for (int b = 0; b <= budget; ++b) {
            if (count[b] == 0) continue;
            for (int v = 0; b + v * w <= budget; ++v) {
                const std::uint64_t add = count[b] * (v == 0 ? 1 : 2);
                next[b + v * w] = std::min(cap + 1, next[b + v * w] + add);
            }
        }
        count = std::move(next);
    }
    std::uint64_t total = 0;
    for (auto c : count) total = std::min(cap + 1, total + c);
    return total;
}

struct ResonanceSearch {
    const std::vector<int>& kappas;
    int order;
    std::vector<int> weights;  // cost per unit of each entry
    std::vector<int> values;   // mu_1..mu_n, nu_1..nu_n
    std::uint64_t checked = 0;

    // Enumerates tuples of cost exactly `remaining` from position `pos` on.
    bool search(std::size_t pos, int remaining) {
        const std::size_t n = kappas.size();
        if (pos == values.size()) {
            if (remaining != 0) return false;
            ++checked;
            long long sum = 0;
            for (std::size_t i = 0; i < n; ++i)
                sum += static_cast<long long>(values[i] + order * values[n + i]) * kappas[i];
            if (sum != 0) return false;
            for (std::size_t i = 0; i < n; ++i)
                if (values[i] != -order * values[n + i]) return true;
            return false;
        }
        // 0, 1, -1, 2, -2, ... so that the first witness found is the simplest one
        for (int mag = 0; mag <= order && mag * weights[pos] <= remaining; ++mag) {
            for (int sign : {1, -1}) {
                if (mag == 0 && sign < 0) continue;
                values[pos] = sign * mag;
                if (search(pos + 1, remaining - mag * weights[pos])) return true;
            }
        }
        values[pos] = 0;
        return false;
    }
};

}  // namespace detail

/// Exhaustive check of frequency non-resonance for order N: every integer tuple
/// (mu, nu) with entries in [-N, N] within the order budget and
/// sum_i (mu_i + N nu_i) kappa_i = 0 must have mu_i = -N nu_i for all i.
/// The smallest violating tuple is returned as witness.
inline ResonanceReport check_nonresonance(const std::vector<int>& kappas, int order,
                                          ResonanceBudget budget = ResonanceBudget::weighted,
                                          std::uint64_t max_tuples = 100'000'000ULL) {
    if (kappas.empty()) throw std::invalid_argument("check_nonresonance: kappa list is empty");
    if (order < 1) throw std::invalid_argument("check_nonresonance: order must be >= 1");
    for (int k : kappas)
        if (k < 1) throw std::invalid_argument("check_nonresonance: kappas must be positive");

    const std::size_t n = kappas.size();
    std::vector<int> weights(2 * n, 1);
    if (budget == ResonanceBudget::weighted)
        for (std::size_t i = n; i < 2 * n; ++i) weights[i] = order;

    const std::uint64_t size = detail::weighted_ball_size(weights, order, max_tuples);
    if (size > max_tuples)
        throw EnumerationInfeasible("check_nonresonance: enumeration exceeds " + std::to_string(max_tuples) +
                                    " tuples");

    detail::ResonanceSearch s{kappas, order, weights, std::vector<int>(2 * n, 0)};
    ResonanceReport report;
    for (int cost = 1; cost <= order; ++cost) {
        if (s.search(0, cost)) {
            report.passes = false;
            std::vector<ResonanceTerm> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = {s.values[i], s.values[n + i]};
            report.witness = std::move(w);
            break;
        }
    }
    report.tuples_checked = s.checked + 1;  // the zero tuple is trivially consistent
    return report;
}

inline std::string format_witness(const std::vector<ResonanceTerm>& w) {
    std::string mu = "mu=(", nu = "nu=(";
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) {
            mu += ",";
            nu += ",";
        }
        mu += std::to_string(w[i].mu);
        nu += std::to_string(w[i].nu);
    }
    return mu + ") " + nu + ")";
}

/// Raised by design_multivariable when the kappas resonate.
class ResonanceError : public std::invalid_argument {
public:
    ResonanceError(const std::string& what, std::vector<ResonanceTerm> witness)
        : std::invalid_argument(what), witness_(std::move(witness)) {}
    [[nodiscard]] const std::vector<ResonanceTerm>& witness() const noexcept { return witness_; }

private:
    std::vector<ResonanceTerm> witness_;
};

/// One pair per coordinate for a degree-m cost, N = m - 1.
///
/// The parity rule follows N = m - 1 (sine for odd N, cosine for even N).
/// Coefficients are computed per coordinate with that coordinate's kappa, so
/// C_i = |c| eps^{-(m-1)/m} grows like kappa_i^{(m-1)/m}.
inline DitherSpec design_multivariable(int m, const std::vector<int>& kappas, double epsilon,
                                       SplitRule split = SplitRule::equal_magnitude) {
    if (m < 2) throw std::invalid_argument("design_multivariable: m must be >= 2");
    if (!(epsilon > 0.0)) throw std::invalid_argument("design_multivariable: epsilon must be positive");
    const int order = m - 1;
    auto report = check_nonresonance(kappas, order);
    if (!report.passes)
        throw ResonanceError("design_multivariable: kappas resonate, " + format_witness(*report.witness),
                             *report.witness);
    DitherSpec spec{order, epsilon, {}};
    for (int k : kappas) spec.pairs.push_back(design_pair(order, k, split));
    return spec;
}

/// Relative deviation of c1^N c2 from the required bracket coefficient.
inline double coefficient_error(const DitherPair& pair, int order) {
    const double product = std::pow(pair.first.coefficient, order) * pair.second.coefficient;
    const double target = bracket_coefficient(order, pair.first.kappa);
    return std::abs(product - target) / std::abs(target);
}

}  // namespace lbes
