#pragma once

// Named experiment configurations.
//
//   m4, m6, m8     x' = C_m (cos(2 pi t/eps) + (-1)^{m/2} J_m(x) sin(2 (m-1) pi t/eps)),
//                  C_m = ((m-1)! (4 pi/eps)^{m-1})^{1/m}, J_m = (x-1)^m / m!, x0 = 4
//   gradient_m*    x' = 2 sqrt(pi/eps) (J_m(x) cos(2 pi t/eps) + sin(2 pi t/eps)), x0 = 4
//   mv4            x_i' = C_i (cos(2 pi kappa_i t/eps) + J(x) sin(6 pi kappa_i t/eps)),
//                  C_i = 6^{1/4} (4 pi kappa_i/eps)^{3/4}, kappa = (1, 4), x0 = (0, 0)
//   limitation     m4 law with eps = 1e-4 started at x0 = 5
//
// The m-presets coincide with design_dithers(m - 1, 1, eps) under the standard
// pair: for even m the sign (-1)^{m/2} equals -(-1)^{floor((m-1)/2)}.

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lbes/cost.hpp"
#include "lbes/dither.hpp"
#include "lbes/simulator.hpp"

namespace lbes {

struct PresetInfo {
    std::string_view name;
    std::string_view description;
    bool expect_divergence = false;
};

inline constexpr std::array<PresetInfo, 7> kPresets{{
    {"m4", "degree-4 cost, N = 3 law, eps = 1e-3", false},
    {"m6", "degree-6 cost, N = 5 law, eps = 1e-4", false},
    {"m8", "degree-8 cost, N = 7 law, eps = 1e-6, 32 steps per fast period", false},
    {"gradient_m4", "degree-4 cost, first-order gradient law, eps = 1e-3", false},
    {"gradient_m6", "degree-6 cost, first-order gradient law, eps = 1e-4", false},
    {"mv4", "two-variable quartic, N = 3 law, kappa = (1, 4), eps = 1e-3", false},
    {"limitation", "degree-4 cost, N = 3 law, eps = 1e-4, x0 = 5", true},
}};

inline bool is_preset(std::string_view name) {
    for (const auto& p : kPresets)
        if (p.name == name) return true;
    return false;
}

inline const PresetInfo& preset_info(std::string_view name) {
    for (const auto& p : kPresets)
        if (p.name == name) return p;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

/// Amplitude C_m of the degree-m single-variable law.
inline double preset_amplitude(int m, double epsilon) {
    return std::pow(detail::factorial(m - 1) * std::pow(4.0 * std::numbers::pi / epsilon, m - 1), 1.0 / m);
}

inline ESConfig high_order_config(int m, double epsilon, double x0, double horizon, int steps_per_fast_period = 64) {
    return ESConfig{make_power_cost(m, 1.0), default_pair(1.0), design_dithers(m - 1, 1, epsilon), {x0}, horizon,
                    steps_per_fast_period, 0};
}

inline ESConfig gradient_config(int m, double epsilon, double x0, double horizon) {
    return ESConfig{make_power_cost(m, 1.0), gradient_pair(1.0), design_dithers(1, 1, epsilon), {x0}, horizon, 64, 0};
}

inline ESConfig preset(std::string_view name) {
    if (name == "m4") return high_order_config(4, 1e-3, 4.0, 10.0);
    if (name == "m6") return high_order_config(6, 1e-4, 4.0, 8.0);
    if (name == "m8") return high_order_config(8, 1e-6, 4.0, 5.0, 32);
    if (name == "gradient_m4") return gradient_config(4, 1e-3, 4.0, 60.0);
    if (name == "gradient_m6") return gradient_config(6, 1e-4, 4.0, 60.0);
    if (name == "mv4")
        return ESConfig{make_quartic_2d(), default_pair(1.0), design_multivariable(4, {1, 4}, 1e-3), {0.0, 0.0}, 12.0,
                        64, 0};
    if (name == "limitation") return high_order_config(4, 1e-4, 5.0, 1.0);
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

}  // namespace lbes
