#pragma once

// Quadrature oracle for the iterated dither integrals of the Chen-Fliess series
//
//   I(w) = int_0^eps int_0^{s_1} ... int_0^{s_{l-1}} v_{w_1}(s_1) ... v_{w_l}(s_l) ds_l ... ds_1
//
// evaluated by l cumulative trapezoid passes on a uniform grid, innermost first.
// Waveforms are unit amplitude; channel coefficients and the eps^{-p} scale are
// applied symbolically by the caller.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbes/cost.hpp"
#include "lbes/dither.hpp"

namespace lbes {

struct UnitWave {
    Waveform waveform = Waveform::cosine;
    int harmonic = 1;  ///< multiple * kappa

    static UnitWave of(const DitherChannel& ch) { return {ch.waveform, ch.harmonic()}; }
    friend bool operator==(const UnitWave&, const UnitWave&) = default;
};

inline constexpr std::size_t kMinGridPoints = 1000;
inline constexpr std::size_t kDefaultGridPoints = 200'000;

namespace detail {

// Samples at s_i = i eps / (points - 1); the phase depends only on s / eps.
inline std::vector<double> sample_wave(const UnitWave& w, std::size_t points) {
    std::vector<double> v(points);
    const double step = 1.0 / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double phase = 2.0 * std::numbers::pi * w.harmonic * (static_cast<double>(i) * step);
        v[i] = w.waveform == Waveform::cosine ? std::cos(phase) : std::sin(phase);
    }
    return v;
}

// out[i] = int_0^{s_i} wave(s) inner(s) ds by the trapezoid rule.
inline void cumulative_trapezoid(std::span<const double> wave, std::span<const double> inner, double h,
                                 std::vector<double>& out) {
    out.resize(wave.size());
    out[0] = 0.0;
    double acc = 0.0;
    double prev = wave[0] * inner[0];
    for (std::size_t i = 1; i < wave.size(); ++i) {
        const double cur = wave[i] * inner[i];
        acc += 0.5 * h * (prev + cur);
        out[i] = acc;
        prev = cur;
    }
}

inline void check_grid(std::size_t points, double epsilon) {
    if (points < kMinGridPoints)
        throw std::invalid_argument("iterated_integral: grid_points must be >= " + std::to_string(kMinGridPoints));
    if (!(epsilon > 0.0)) throw std::invalid_argument("iterated_integral: epsilon must be positive");
}

}  // namespace detail

/// Length-l iterated integral over [0, eps]; sequence[0] is the outermost variable s_1.
inline double iterated_integral(std::span<const UnitWave> sequence, double epsilon,
                                std::size_t grid_points = kDefaultGridPoints) {
    detail::check_grid(grid_points, epsilon);
    if (sequence.empty()) return 1.0;
    const double h = epsilon / static_cast<double>(grid_points - 1);
    std::vector<double> inner(grid_points, 1.0), next;
    for (std::size_t j = sequence.size(); j-- > 0;) {
        const auto wave = detail::sample_wave(sequence[j], grid_points);
        detail::cumulative_trapezoid(wave, inner, h, next);
        inner.swap(next);
    }
    return inner.back();
}

/// I_{k,N+1}(eps) = eps^{N+1} (-1)^{floor(N/2)+k} / ((4 pi kappa)^N k! (N-k)!).
inline double closed_form_I(int k, int order, int kappa, double epsilon) {
    if (order < 1) throw std::invalid_argument("closed_form_I: order must be >= 1");
    if (k < 0 || k > order) throw std::invalid_argument("closed_form_I: k must lie in [0, N]");
    if (kappa < 1) throw std::invalid_argument("closed_form_I: kappa must be >= 1");
    const double sign = ((order / 2 + k) % 2) ? -1.0 : 1.0;
    return sign * std::pow(epsilon, order + 1) /
           (std::pow(4.0 * std::numbers::pi * kappa, order) * detail::factorial(k) * detail::factorial(order - k));
}

// ---------------------------------------------------------------------------
// Excitation certificate
// ---------------------------------------------------------------------------

enum class CertificateCheck {
    vanish,    ///< length <= N: integral must vanish
    collapse,  ///< length N+1, single channel-2 entry: c1^N c2 I = eps^{N+1} (-1)^k C(N,k)
    info       ///< reported, not checked
};

inline const char* to_string(CertificateCheck c) noexcept {
    switch (c) {
        case CertificateCheck::vanish: return "vanish";
        case CertificateCheck::collapse: return "collapse";
        case CertificateCheck::info: return "info";
    }
    return "info";
}

struct CertificateRow {
    std::vector<int> word;  ///< channel per integration variable, outermost first
    CertificateCheck check = CertificateCheck::info;
    double value = 0.0;  ///< unit-waveform integral (vanish/info) or c1^N c2 * integral (collapse)
    double bound = 0.0;  ///< allowed magnitude (vanish) or expected value (collapse)
    double error = 0.0;  ///< |value| / bound (vanish) or relative error (collapse)
    bool pass = true;
};

struct Certificate {
    bool passed = true;
    std::vector<CertificateRow> rows;
    std::size_t worst = 0;  ///< index of the row with the largest error among checked rows
};

struct CertifyOptions {
    std::size_t grid_points = kDefaultGridPoints;
    double tol_vanish = 1e-6;
    double tol_collapse = 1e-5;
};

inline constexpr int kMaxCertifyLength = 6;

inline std::string format_word(const std::vector<int>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "-" : "") + std::to_string(w[i]);
    return s;
}

/// Integrates every channel word of length 1..max_len for a single-pair design
/// and checks that words up to length N vanish and that the single-channel-2
/// words of length N+1 collapse onto the binomial coefficients of ad_{g1}^N g2.
inline Certificate certify_excitation(const DitherSpec& spec, int max_len, const CertifyOptions& opt = {}) {
    if (spec.pairs.size() != 1) throw std::invalid_argument("certify_excitation: expected a single pair");
    const int order = spec.order;
    if (max_len < order + 1) throw std::invalid_argument("certify_excitation: max_len must be >= N + 1");
    if (max_len > kMaxCertifyLength)
        throw std::invalid_argument("certify_excitation: max_len capped at " + std::to_string(kMaxCertifyLength));
    const double eps = spec.epsilon;
    detail::check_grid(opt.grid_points, eps);

    const auto& pair = spec.pairs.front();
    const std::vector<double> waves[2] = {
        detail::sample_wave(UnitWave::of(pair.first), opt.grid_points),
        detail::sample_wave(UnitWave::of(pair.second), opt.grid_points),
    };
    const double h = eps / static_cast<double>(opt.grid_points - 1);
    const double product = std::pow(pair.first.coefficient, order) * pair.second.coefficient;

    Certificate cert;
    std::vector<int> suffix;  // word read innermost-last; built from the innermost variable outwards

    auto record = [&](double value) {
        CertificateRow row;
        row.word.assign(suffix.rbegin(), suffix.rend());
        const int len = static_cast<int>(row.word.size());
        int seconds = 0, pos = -1;
        for (int i = 0; i < len; ++i)
            if (row.word[i] == 2) {
                ++seconds;
                pos = i;
            }
        if (len <= order) {
            row.check = CertificateCheck::vanish;
            row.value = value;
            row.bound = opt.tol_vanish * std::pow(eps, len);
            row.error = std::abs(value) / row.bound;
            row.pass = row.error <= 1.0;
        } else if (len == order + 1 && seconds == 1) {
            row.check = CertificateCheck::collapse;
            row.value = product * value;
            row.bound = std::pow(eps, order + 1) * ((pos % 2) ? -1.0 : 1.0) * detail::binomial(order, pos);
            row.error = std::abs(row.value - row.bound) / std::abs(row.bound);
            row.pass = row.error <= opt.tol_collapse;
        } else {
            row.check = CertificateCheck::info;
            row.value = value;
        }
        cert.rows.push_back(std::move(row));
    };

    // Depth-first over suffixes: F(c, rest) = cumtrapz(v_c * F(rest)).
    auto dfs = [&](auto&& self, const std::vector<double>& inner) -> void {
        for (int c = 1; c <= 2; ++c) {
            std::vector<double> out;
            detail::cumulative_trapezoid(waves[c - 1], inner, h, out);
            suffix.push_back(c);
            record(out.back());
            if (static_cast<int>(suffix.size()) < max_len) self(self, out);
            suffix.pop_back();
        }
    };
    dfs(dfs, std::vector<double>(opt.grid_points, 1.0));

    double worst = -1.0;
    for (std::size_t i = 0; i < cert.rows.size(); ++i) {
        const auto& r = cert.rows[i];
        if (r.check == CertificateCheck::info) continue;
        if (!r.pass) cert.passed = false;
        const double score = r.check == CertificateCheck::vanish ? r.error : r.error / opt.tol_collapse;
        if (score > worst) {
            worst = score;
            cert.worst = i;
        }
    }
    return cert;
}

}  // namespace lbes
