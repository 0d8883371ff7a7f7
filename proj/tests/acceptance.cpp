// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   acceptance            all criteria
//   acceptance 4 7        selected criteria

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lbes/lbes.hpp"

using namespace lbes;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double max_deviation_after(const Trajectory& tr, double t0) {
    double worst = 0.0;
    const auto& xs = tr.meta->model.minimizer();
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.times[k] < t0 - 1e-12) continue;
        for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(tr.states[k][i] - xs[i]));
    }
    return worst;
}

/// First recorded time from which every later sample stays within tol.
double settle_time(const Trajectory& tr, double tol) {
    const auto& xs = tr.meta->model.minimizer();
    double t = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) d = std::max(d, std::abs(tr.states[k][i] - xs[i]));
        if (d >= tol) t = k + 1 < tr.size() ? tr.times[k + 1] : INFINITY;
    }
    return t;
}

Outcome closed_form() {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n)
        for (int kappa = 1; kappa <= 2; ++kappa) {
            const auto p = design_pair(n, kappa);
            for (int k = 0; k <= n; ++k) {
                std::vector<UnitWave> seq(n + 1, UnitWave::of(p.first));
                seq[k] = UnitWave::of(p.second);
                const double q = iterated_integral(seq, 1.0, 200'000);
                const double c = closed_form_I(k, n, kappa, 1.0);
                worst = std::max(worst, std::abs(q - c) / std::abs(c));
            }
        }
    return {worst <= 1e-5, "worst relative error " + fmt("%.2e", worst)};
}

Outcome certificate() {
    std::string detail;
    bool ok = true;
    for (int n = 1; n <= 3; ++n)
        for (int kappa = 1; kappa <= 2; ++kappa) {
            const auto cert = certify_excitation(design_dithers(n, kappa, 1.0), n + 1);
            ok = ok && cert.passed;
            if (!cert.passed) detail += " N=" + std::to_string(n) + " fails at " + format_word(cert.rows[cert.worst].word);
        }
    return {ok, ok ? "N=1..3, kappa=1,2 certified" : detail};
}

Outcome bracket_identity() {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 5.0);
    double worst_id = 0.0, worst_rec = 0.0;
    for (int m = 2; m <= 8; ++m) {
        const auto c = make_power_cost(m, 1.0);
        for (int n = 1; n <= 5; ++n)
            for (int s = 0; s < 50; ++s) {
                const double x = u(rng);
                const double target = -c.derivative(n, x);
                const double a = ad_bracket(n, default_pair(1.0), c, x);
                const double r = ad_bracket_recursive(n, default_pair(1.0), c, x);
                worst_id = std::max(worst_id, std::abs(a - target) / (1 + std::abs(target)));
                worst_rec = std::max(worst_rec, std::abs(a - r) / (1 + std::abs(r)));
            }
    }
    return {worst_id <= 1e-8 && worst_rec <= 1e-8,
            "identity " + fmt("%.1e", worst_id) + ", sum vs recursion " + fmt("%.1e", worst_rec)};
}

Outcome m4_reproduction() {
    const auto tr = simulate(preset("m4"));
    if (tr.diverged) return {false, "diverged"};
    const double late = max_deviation_after(tr, 5.0);
    const auto env = envelope(tr, {1.0}, 0.1);
    const auto cmp = compare_models(env);
    const bool ok = late < 0.05 && cmp.exponential.rate > 0 && cmp.exponential.r_squared >= 0.9 &&
                    cmp.exponential.r_squared > cmp.polynomial.r_squared;
    return {ok, "max|x-1| on [5,10] " + fmt("%.3g", late) + ", settles at t=" + fmt("%.2f", settle_time(tr, 0.05)) +
                    ", gamma " + fmt("%.3f", cmp.exponential.rate) + ", R2 exp " +
                    fmt("%.4f", cmp.exponential.r_squared) + " vs poly " + fmt("%.4f", cmp.polynomial.r_squared)};
}

Outcome gradient_baseline() {
    const auto tr = simulate(preset("gradient_m4"));
    if (tr.diverged) return {false, "diverged"};
    const double final_dev = std::abs(tr.states.back()[0] - 1.0);
    const auto env = envelope(tr, {1.0}, 0.6);
    const auto fit = fit_polynomial(env, FitWindow{20.0, 60.0});
    const bool ok = final_dev > 0.05 && fit.rate >= -0.7 && fit.rate <= -0.3;
    return {ok, "|x(60)-1| " + fmt("%.4f", final_dev) + ", late slope " + fmt("%.3f", fit.rate) + " (theory -0.5)"};
}

Outcome higher_degree() {
    const auto t6 = simulate(preset("m6"));
    const double e6 = final_error(t6);
    double gamma = -1.0;
    std::string fit_note;
    try {
        gamma = fit_exponential(envelope(t6, {1.0}, 0.08)).rate;
    } catch (const FitError& e) {
        fit_note = std::string(" (") + e.what() + ")";
    }
    const auto t8 = simulate(preset("m8"));
    const double e8 = final_error(t8);
    const bool ok = !t6.diverged && !t8.diverged && settle_time(t6, 0.05) <= t6.times.back() && e6 < 0.05 &&
                    gamma > 0 && e8 < 0.1;
    return {ok, "m6 |x(8)-1| " + fmt("%.4g", e6) + ", gamma " + fmt("%.3f", gamma) + fit_note + "; m8 |x(5)-1| " +
                    fmt("%.4g", e8)};
}

Outcome multivariable() {
    const auto tr = simulate(preset("mv4"));
    if (tr.diverged) return {false, "diverged"};
    const double late = max_deviation_after(tr, 10.0);
    const auto good = check_nonresonance({1, 4}, 3);
    const auto bad = check_nonresonance({1, 1}, 3);
    const bool ok = late < 0.05 && good.passes && !bad.passes && bad.witness;
    std::printf("       (1,1) witness: %s\n", bad.witness ? format_witness(*bad.witness).c_str() : "none");
    return {ok, "max_i|x_i-1| on [10,12] " + fmt("%.4f", late) + ", (1,4) " + (good.passes ? "passes" : "fails") +
                    ", (1,1) " + (bad.passes ? "passes" : "fails")};
}

Outcome residual() {
    auto a = preset("m4"), b = preset("m4");
    a.spec.epsilon = 1e-3;
    b.spec.epsilon = 1e-4;
    const auto est = residual_order({a, b}, {4.0});
    return {est.order >= 1.10, "slope " + fmt("%.3f", est.order) + " (theory 1.25)"};
}

Outcome limitation() {
    bool ok = true;
    std::string detail;
    for (double x0 : {5.0, -5.0}) {
        auto cfg = preset("limitation");
        cfg.x0 = {x0};
        const double v = initial_speed(cfg);
        const auto tr = simulate(cfg);  // must not throw
        ok = ok && v >= 0.5e4 && v <= 2e4 && !tr.empty();
        detail += "x0=" + fmt("%+.0f", x0) + ": |x'(0)| " + fmt("%.0f", v) +
                  (tr.diverged ? ", diverged at t=" + fmt("%.3g", tr.divergence_time)
                               : ", completes, x(1)=" + fmt("%.4g", tr.states.back()[0])) +
                  "; ";
    }
    return {ok, detail};
}

Outcome assumption() {
    const auto rep = verify_assumption(make_quartic_2d(), 4, Box{{-1, -1}, {3, 3}}, 41);
    const bool ok = rep.alpha2 <= 5.0 && rep.beta1 >= 8.0 && rep.violations.empty();
    return {ok, rep.sampling + ": alpha2 " + fmt("%.4f", rep.alpha2) + " (<= 5), beta1 " + fmt("%.4f", rep.beta1) +
                    " (>= 8)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "closed-form iterated integrals", 30, closed_form},
        {2, "excitation certificate", 60, certificate},
        {3, "bracket identity", 60, bracket_identity},
        {4, "m4 reproduction", 60, m4_reproduction},
        {5, "gradient baseline contrast", 120, gradient_baseline},
        {6, "higher-degree presets m6, m8", 35 * 60, higher_degree},
        {7, "multivariable mv4 and non-resonance", 120, multivariable},
        {8, "residual order", 60, residual},
        {9, "limitation study", 60, limitation},
        {10, "assumption verification", 10, assumption},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt > c.budget_s) {
            o.pass = false;
            o.detail += " [over runtime budget " + fmt("%.0f s", c.budget_s) + "]";
        }
        failed += !o.pass;
        std::printf("[%s] criterion %2d  %-38s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, dt,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
