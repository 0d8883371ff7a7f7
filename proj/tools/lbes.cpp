// lbes: batch runner for high-order extremum seeking experiments.
//
//   lbes simulate  --preset m4 --out out/m4
//   lbes certify   --order 3 --kappa 1
//   lbes resonance --kappa 1,4 --order 3
//   lbes fit       --input out/m4/trajectory.csv --x-star 1
//   lbes residual  --preset m4 --epsilons 1e-3,1e-4
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 unexpected divergence.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbes/lbes.hpp"

namespace fs = std::filesystem;
using namespace lbes;

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kDiverged = 3 };

struct Globals {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::optional<int> steps_per_period;
    std::optional<double> horizon;
};

ExperimentConfig resolve_config(const Globals& g) {
    if (!g.config_path.empty() && !g.preset_name.empty())
        throw ConfigError("--config and --preset are mutually exclusive");
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        cfg = load_config(g.config_path);
    } else if (!g.preset_name.empty()) {
        if (!is_preset(g.preset_name)) throw ConfigError("unknown preset '" + g.preset_name + "'");
        cfg.preset = g.preset_name;
    } else {
        throw ConfigError("need --config PATH or --preset NAME");
    }
    if (g.steps_per_period) cfg.integrator.steps_per_fast_period = *g.steps_per_period;
    if (g.horizon) cfg.integrator.horizon = *g.horizon;
    if (!g.out_dir.empty()) cfg.output.dir = g.out_dir;
    return cfg;
}

std::string join_path(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string describe(const ExperimentConfig& cfg) {
    if (cfg.preset) return "preset " + *cfg.preset;
    return "inline " + cfg.problem->cost.name + " cost";
}

// ---------------------------------------------------------------------------

int run_simulate(const Globals& g) {
    const ExperimentConfig cfg = resolve_config(g);
    const ESConfig es = build_es_config(cfg);
    const Point& xs = es.model.minimizer();

    std::cout << "simulate: " << describe(cfg) << "\n"
              << std::setprecision(6) << "  N = " << es.spec.order << "  eps = " << es.epsilon()
              << "  horizon = " << es.horizon << "  steps/period = " << es.steps_per_period()
              << "  h = " << es.step() << "  seed = " << g.seed << "\n";
    std::cout << "  |x'(0)| = " << initial_speed(es) << "\n";

    const Trajectory traj = simulate(es);
    ensure_dir(cfg.output.dir);
    {
        auto out = open_output(join_path(cfg.output.dir, cfg.output.trajectory));
        write_trajectory_csv(out, traj);
    }
    {
        auto out = open_output(join_path(cfg.output.dir, cfg.output.plot));
        write_plot_data(out, traj, xs);
    }

    if (traj.diverged) {
        std::cout << "  diverged at t = " << traj.divergence_time << " (|x| > 1e12 or non-finite)\n";
        if (cfg.divergence_expected()) {
            std::cout << "  divergence expected for this configuration\n";
            return kOk;
        }
        std::cerr << "lbes: unexpected divergence\n";
        return kDiverged;
    }

    const double final_err = final_error(traj);
    std::cout << "  final |x - x*| = " << final_err << " at t = " << traj.times.back() << "\n";
    if (cfg.divergence_expected())
        std::cout << "  no divergence; first-period excursion = " << period_excursion(es, es.x0) << "\n";

    const Envelope env = envelope(traj, xs, window_width(cfg, es));
    {
        auto out = open_output(join_path(cfg.output.dir, cfg.output.envelope));
        write_envelope_csv(out, env);
    }
    FitOptions opt;
    opt.floor_quantile = cfg.analysis.floor_quantile;
    opt.window = {cfg.analysis.fit_start, cfg.analysis.fit_end};
    {
        auto out = open_output(join_path(cfg.output.dir, cfg.output.fit));
        write_fit_header(out);
        try {
            const auto cmp = compare_models(env, opt);
            write_fit_row(out, cmp.exponential);
            write_fit_row(out, cmp.polynomial);
            std::cout << "  decay fits:\n";
            write_fit_summary(std::cout, cmp.exponential);
            write_fit_summary(std::cout, cmp.polynomial);
            std::cout << "  preferred model: " << to_string(cmp.preferred()) << "\n";
        } catch (const FitError& e) {
            std::cout << "  exponential fit unavailable: " << e.what() << "\n";
            try {
                const auto p = fit_polynomial(env, opt.window);
                write_fit_row(out, p);
                std::cout << "  decay fit:\n";
                write_fit_summary(std::cout, p);
            } catch (const FitError& e2) {
                std::cout << "  polynomial fit unavailable: " << e2.what() << "\n";
            }
        }
    }
    if (!cfg.output.svg.empty()) {
        auto out = open_output(join_path(cfg.output.dir, cfg.output.svg));
        write_svg(out, traj, xs, env, describe(cfg));
    }
    std::cout << "  wrote " << cfg.output.dir << "\n";
    return kOk;
}

struct CertifyArgs {
    int order = 1;
    int kappa = 1;
    double epsilon = 1.0;
    int max_len = 0;
    std::size_t grid = kDefaultGridPoints;
    std::string split = "equal_magnitude";
    bool break_frequency = false;
};

int run_certify(const Globals& g, const CertifyArgs& a) {
    if (a.order < 1 || a.order > 5) throw std::invalid_argument("--order must lie in [1, 5]");
    if (a.kappa < 1) throw std::invalid_argument("--kappa must be >= 1");
    const int max_len = a.max_len > 0 ? a.max_len : a.order + 1;
    const SplitRule split = a.split == "unit_c1" ? SplitRule::unit_c1 : SplitRule::equal_magnitude;
    if (a.split != "unit_c1" && a.split != "equal_magnitude") throw std::invalid_argument("--split: unknown rule");

    DitherSpec spec = design_dithers(a.order, a.kappa, a.epsilon, split);
    if (a.break_frequency) spec.pairs[0].second.frequency_multiple = a.order == 1 ? 2 : a.order - 1;
    const auto& pair = spec.pairs[0];
    std::cout << std::setprecision(10) << "certify: N = " << a.order << "  kappa = " << a.kappa
              << "  eps = " << a.epsilon << "  max_len = " << max_len << "  grid = " << a.grid << "\n"
              << "  ch1 " << to_string(pair.first.waveform) << " x" << pair.first.frequency_multiple
              << "  c1 = " << pair.first.coefficient << "\n"
              << "  ch2 " << to_string(pair.second.waveform) << " x" << pair.second.frequency_multiple
              << "  c2 = " << pair.second.coefficient << "\n";

    CertifyOptions opt;
    opt.grid_points = a.grid;
    const Certificate cert = certify_excitation(spec, max_len, opt);

    // Quadrature against the closed form of I_{k,N+1}.
    bool closed_ok = true;
    std::cout << "  closed form I_{k,N+1}:\n";
    for (int k = 0; k <= a.order; ++k) {
        std::vector<UnitWave> seq(static_cast<std::size_t>(a.order) + 1, UnitWave::of(pair.first));
        seq[static_cast<std::size_t>(k)] = UnitWave::of(pair.second);
        const double q = iterated_integral(seq, a.epsilon, a.grid);
        const double c = closed_form_I(k, a.order, a.kappa, a.epsilon);
        const double rel = std::abs(q - c) / std::abs(c);
        const bool ok = rel <= opt.tol_collapse;
        closed_ok = closed_ok && ok;
        std::cout << "    k = " << k << "  quadrature = " << q << "  closed = " << c << "  rel = " << rel
                  << (ok ? "  ok" : "  FAIL") << "\n";
    }

    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    ensure_dir(dir);
    {
        auto out = open_output(join_path(dir, "certificate.csv"));
        write_certificate_csv(out, cert);
    }
    const auto& worst = cert.rows[cert.worst];
    std::cout << "  words checked: " << cert.rows.size() << "  worst: " << format_word(worst.word) << " ("
              << to_string(worst.check) << ", value " << worst.value << ", bound " << worst.bound << ")\n";
    if (cert.passed && closed_ok) {
        std::cout << "  PASS\n";
        return kOk;
    }
    std::cout << "  FAIL: worst offending word " << format_word(worst.word) << "\n";
    return kCheckFailed;
}

struct ResonanceArgs {
    std::vector<int> kappas;
    int order = 1;
    std::string budget = "weighted";
    std::uint64_t max_tuples = 100'000'000;
};

int run_resonance(const ResonanceArgs& a) {
    if (a.kappas.empty()) throw std::invalid_argument("--kappa: need at least one entry");
    if (a.budget != "weighted" && a.budget != "literal") throw std::invalid_argument("--budget: weighted or literal");
    const auto budget = a.budget == "literal" ? ResonanceBudget::literal : ResonanceBudget::weighted;
    std::cout << "resonance: kappa = (";
    for (std::size_t i = 0; i < a.kappas.size(); ++i) std::cout << (i ? ", " : "") << a.kappas[i];
    std::cout << ")  N = " << a.order << "  budget = " << a.budget << "\n";
    try {
        const auto rep = check_nonresonance(a.kappas, a.order, budget, a.max_tuples);
        std::cout << "  tuples checked: " << rep.tuples_checked << "\n";
        if (rep.passes) {
            std::cout << "  PASS\n";
            return kOk;
        }
        std::cout << "  FAIL  witness: " << format_witness(*rep.witness) << "\n";
        return kCheckFailed;
    } catch (const EnumerationInfeasible& e) {
        std::cout << "  INFEASIBLE: " << e.what() << "\n";
        return kUsage;
    }
}

struct FitArgs {
    std::string input;
    std::vector<double> x_star;
    std::optional<double> window;
    double floor_quantile = 0.1;
    std::optional<double> t_start, t_end;
};

int run_fit(const Globals& g, const FitArgs& a) {
    Point xs = a.x_star;
    if (xs.empty() && (!g.preset_name.empty() || !g.config_path.empty()))
        xs = build_es_config(resolve_config(g)).model.minimizer();
    if (xs.empty()) throw std::invalid_argument("fit: need --x-star, --preset or --config");
    std::ifstream in(a.input);
    if (!in) throw ConfigError("cannot open trajectory '" + a.input + "'");
    const Trajectory traj = read_trajectory_csv(in);
    if (traj.states.front().size() != xs.size()) throw std::invalid_argument("fit: --x-star dimension mismatch");

    const double width = a.window.value_or(std::max(traj.times.back() / 100.0, 1e-12));
    const Envelope env = envelope(traj, xs, width);
    FitOptions opt;
    opt.floor_quantile = a.floor_quantile;
    opt.window = {a.t_start, a.t_end};

    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    ensure_dir(dir);
    {
        auto out = open_output(join_path(dir, "envelope.csv"));
        write_envelope_csv(out, env);
    }
    std::cout << "fit: " << a.input << "  window width = " << width << "  envelope points = " << env.size() << "\n";
    auto out = open_output(join_path(dir, "fit.csv"));
    write_fit_header(out);
    bool any = false;
    try {
        const auto e = fit_exponential(env, opt);
        write_fit_row(out, e);
        write_fit_summary(std::cout, e);
        any = true;
    } catch (const FitError& e) {
        std::cout << "  exponential fit unavailable: " << e.what() << "\n";
    }
    try {
        const auto p = fit_polynomial(env, opt.window);
        write_fit_row(out, p);
        write_fit_summary(std::cout, p);
        any = true;
    } catch (const FitError& e) {
        std::cout << "  polynomial fit unavailable: " << e.what() << "\n";
    }
    return any ? kOk : kCheckFailed;
}

struct ResidualArgs {
    std::vector<double> epsilons{1e-3, 1e-4};
    std::vector<double> x0;
    std::optional<double> min_order;
};

int run_residual(const Globals& g, const ResidualArgs& a) {
    const ExperimentConfig cfg = resolve_config(g);
    const ESConfig base = build_es_config(cfg);
    const Point x0 = a.x0.empty() ? base.x0 : a.x0;
    if (x0.size() != base.model.dimension()) throw std::invalid_argument("residual: --x0 dimension mismatch");
    std::vector<ESConfig> family;
    for (double e : a.epsilons) {
        if (!(e > 0.0)) throw std::invalid_argument("residual: epsilons must be positive");
        ESConfig c = base;
        c.spec.epsilon = e;
        c.horizon = e;
        family.push_back(std::move(c));
    }
    std::cout << "residual: " << describe(cfg) << "  N = " << base.spec.order << "\n";
    ResidualEstimate est;
    try {
        est = residual_order(family, x0);
    } catch (const std::runtime_error& e) {
        std::cout << "  not measurable: " << e.what() << "\n";
        return kCheckFailed;
    }
    std::cout << std::setprecision(6);
    for (std::size_t i = 0; i < est.epsilons.size(); ++i)
        std::cout << "  eps = " << est.epsilons[i] << "  Delta = " << est.residuals[i]
                  << "  integrator error = " << est.integrator_errors[i] << "\n";
    std::cout << "  order = " << est.order << "\n";
    if (a.min_order && est.order < *a.min_order) {
        std::cout << "  FAIL: order below " << *a.min_order << "\n";
        return kCheckFailed;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-order Lie bracket extremum seeking experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "Experiment config (JSON)");
    app.add_option("--preset", g.preset_name, "Named preset: m4 m6 m8 gradient_m4 gradient_m6 mv4 limitation");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--seed", g.seed, "Seed for randomized utilities (runs are deterministic)");
    app.add_option("--steps-per-period", g.steps_per_period, "RK4 steps per fastest dither period (>= 16)");
    app.add_option("--horizon", g.horizon, "Simulation horizon in seconds");

    auto* sim = app.add_subcommand("simulate", "Integrate an ES system and fit its decay");

    CertifyArgs ca;
    auto* cert = app.add_subcommand("certify", "Check the iterated integrals of a dither design");
    cert->add_option("--order", ca.order, "Design order N (<= 5)")->required();
    cert->add_option("--kappa", ca.kappa, "Frequency multiplier");
    cert->add_option("--epsilon", ca.epsilon, "Dither period");
    cert->add_option("--max-len", ca.max_len, "Longest word (default N + 1, <= 6)");
    cert->add_option("--grid", ca.grid, "Quadrature grid points (>= 1000)");
    cert->add_option("--split", ca.split, "equal_magnitude or unit_c1");
    cert->add_flag("--break-frequency", ca.break_frequency, "Detune channel 2 (test hook)");

    ResonanceArgs ra;
    auto* res = app.add_subcommand("resonance", "Check frequency non-resonance");
    res->add_option("--kappa", ra.kappas, "Comma-separated kappas")->required()->delimiter(',');
    res->add_option("--order", ra.order, "Design order N")->required();
    res->add_option("--budget", ra.budget, "weighted or literal");
    res->add_option("--max-tuples", ra.max_tuples, "Enumeration cap");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit decay models to a trajectory CSV");
    fit->add_option("--input", fa.input, "Trajectory CSV")->required();
    fit->add_option("--x-star", fa.x_star, "Minimizer, comma-separated")->delimiter(',');
    fit->add_option("--window-width", fa.window, "Envelope window width");
    fit->add_option("--floor-quantile", fa.floor_quantile, "Floor quantile in (0, 1)");
    fit->add_option("--t-start", fa.t_start, "Fit window start");
    fit->add_option("--t-end", fa.t_end, "Fit window end");

    ResidualArgs rsa;
    auto* resid = app.add_subcommand("residual", "Order of the one-period remainder across eps");
    resid->add_option("--epsilons", rsa.epsilons, "Comma-separated eps values")->delimiter(',');
    resid->add_option("--x0", rsa.x0, "Initial point, comma-separated")->delimiter(',');
    resid->add_option("--min-order", rsa.min_order, "Fail when the order is below this");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (sim->parsed()) return run_simulate(g);
        if (cert->parsed()) return run_certify(g, ca);
        if (res->parsed()) return run_resonance(ra);
        if (fit->parsed()) return run_fit(g, fa);
        if (resid->parsed()) return run_residual(g, rsa);
    } catch (const ConfigError& e) {
        std::cerr << "lbes: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "lbes: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "lbes: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}
