#include <sstream>

#include <gtest/gtest.h>

#include "lbes/config.hpp"
#include "lbes/io.hpp"

using namespace lbes;

TEST(Config, PresetRoundTrip) {
    const auto cfg = parse_config(R"({"preset": "m4", "integrator": {"horizon": 2.5}, "output": {"dir": "x"}})");
    ASSERT_TRUE(cfg.preset);
    EXPECT_EQ(*cfg.preset, "m4");
    EXPECT_EQ(cfg.integrator.horizon, 2.5);
    EXPECT_EQ(cfg.output.dir, "x");
    EXPECT_EQ(parse_config(to_json(cfg)), cfg);
    EXPECT_FALSE(cfg.divergence_expected());
    EXPECT_TRUE(parse_config(R"({"preset": "limitation"})").divergence_expected());
    EXPECT_FALSE(parse_config(R"({"preset": "limitation", "expect_divergence": false})").divergence_expected());
}

TEST(Config, InlineRoundTrip) {
    const std::string text = R"({
      "cost": {"name": "power", "m": 6, "x_star": 0.5, "normalized": false},
      "pair": {"kind": "standard", "sigma": 2.0},
      "design": {"order": 5, "kappa": [2], "epsilon": 1e-4, "split": "unit_c1"},
      "x0": [3.0],
      "integrator": {"horizon": 1, "steps_per_fast_period": 32, "record_stride": 7},
      "analysis": {"window_width": 0.05, "floor_quantile": 0.2, "fit_start": 0.1, "fit_end": 0.9},
      "output": {"dir": "o", "svg": "p.svg"},
      "expect_divergence": true
    })";
    const auto cfg = parse_config(text);
    ASSERT_TRUE(cfg.problem);
    EXPECT_EQ(cfg.problem->cost.m, 6);
    EXPECT_EQ(cfg.problem->design.split, SplitRule::unit_c1);
    EXPECT_EQ(cfg.integrator.record_stride, 7u);
    EXPECT_EQ(cfg.analysis.fit_end, 0.9);
    const auto again = parse_config(to_json(cfg));
    EXPECT_EQ(again, cfg);
    EXPECT_EQ(to_json(again), to_json(cfg));

    const auto es = build_es_config(cfg);
    EXPECT_EQ(es.spec.order, 5);
    EXPECT_EQ(es.spec.pairs[0].first.kappa, 2);
    EXPECT_DOUBLE_EQ(es.pair.sigma, 2.0);
    EXPECT_EQ(es.steps_per_fast_period, 32);
    EXPECT_EQ(es.record_stride, 7u);
    EXPECT_DOUBLE_EQ(es.model.derivative(5, 1.5), 720.0);
}

TEST(Config, InlineDefaults) {
    const auto cfg = parse_config(R"({"cost": {"name": "quartic2d"}, "design": {"kappa": [1, 4]}, "x0": [0, 0]})");
    const auto es = build_es_config(cfg);
    EXPECT_EQ(es.spec.order, 3);
    EXPECT_EQ(es.spec.pairs.size(), 2u);
    EXPECT_EQ(es.spec, preset("mv4").spec);

    const auto g = build_es_config(parse_config(
        R"({"cost": {"name": "power", "m": 4}, "pair": {"kind": "gradient"}, "design": {"epsilon": 1e-3}, "x0": [4]})"));
    EXPECT_EQ(g.spec.order, 1);
    EXPECT_EQ(g.pair.kind, PairKind::gradient);
    EXPECT_DOUBLE_EQ(window_width(ExperimentConfig{}, g), 0.1);
}

TEST(Config, Diagnostics) {
    auto message = [](const std::string& text) {
        try {
            parse_config(text, "f.json");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("{\n  \"preset\": \"m4\",\n  oops\n}").find("f.json:3:"), std::string::npos);
    EXPECT_NE(message(R"({"preset": "m4", "cost": {"name": "power"}})").find("'preset'"), std::string::npos);
    EXPECT_NE(message(R"({"preset": "m9"})").find("unknown preset"), std::string::npos);
    EXPECT_NE(message(R"({"preset": "m4", "integrator": {"horizon": "long"}})").find("integrator.horizon"),
              std::string::npos);
    EXPECT_NE(message(R"({"preset": "m4", "integrator": {"step": 1}})").find("integrator.step': unknown key"),
              std::string::npos);
    EXPECT_NE(message(R"({"cost": {"name": "power"}, "design": {"kappa": [0]}, "x0": [1]})").find("design.kappa"),
              std::string::npos);
    EXPECT_NE(message(R"({"cost": {"name": "power"}, "design": {}, "x0": [1, "a"]})").find("x0[1]"),
              std::string::npos);
    EXPECT_NE(message(R"({})").find("need either"), std::string::npos);
    EXPECT_NE(message(R"({"preset": "m4", "integrator": {"steps_per_fast_period": 8}})").find("must be >= 16"),
              std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);

    const auto resonant =
        parse_config(R"({"cost": {"name": "quartic2d"}, "design": {"kappa": [1, 1]}, "x0": [0, 0]})");
    try {
        build_es_config(resonant);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("mu=(1,-1)"), std::string::npos);
    }
}

TEST(Io, TrajectoryCsvRoundTrip) {
    auto cfg = preset("mv4");
    cfg.horizon = 0.01;
    cfg.record_stride = 100;
    const auto tr = simulate(cfg);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,x_1,x_2,J");
    std::istringstream is(text);
    const auto back = read_trajectory_csv(is);
    ASSERT_EQ(back.size(), tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(back.times[i], tr.times[i]);
        EXPECT_EQ(back.states[i], tr.states[i]);
        EXPECT_EQ(back.costs[i], tr.costs[i]);
    }
    std::ostringstream again;
    write_trajectory_csv(again, simulate(cfg));
    EXPECT_EQ(again.str(), text);

    std::istringstream bad("t,x_1,J\n0,1\n");
    EXPECT_THROW(read_trajectory_csv(bad), std::invalid_argument);
}

TEST(Io, OtherWriters) {
    std::ostringstream env, fit, cert, plot, svg;
    write_envelope_csv(env, {{0.5, 1.0}, {1.5, 0.25}});
    EXPECT_EQ(env.str(), "t,e\n0.5,1\n1.5,0.25\n");
    write_fit_header(fit);
    write_fit_row(fit, DecayFit{DecayKind::exponential, 1.0, 2.0, 0.0, 0.99, 0.5, 8.5, 12});
    EXPECT_EQ(fit.str(), "kind,rate,prefactor,floor,r_squared,t_start,t_end,points\nexponential,1,2,0,0.98999999999999999,0.5,8.5,12\n");

    Certificate c;
    c.rows.push_back({{1, 2}, CertificateCheck::collapse, 1.0, 1.0, 0.0, true});
    c.rows.push_back({{2, 2, 1}, CertificateCheck::info, 0.5, 0.0, 0.0, true});
    write_certificate_csv(cert, c);
    EXPECT_EQ(cert.str(), "word,check,value,bound,pass\n1-2,collapse,1,1,true\n2-2-1,info,0.5,,\n");

    Trajectory tr;
    tr.times = {0.0, 1.0};
    tr.states = {{2.0}, {1.5}};
    tr.costs = {0.0, 0.0};
    write_plot_data(plot, tr, {1.0});
    EXPECT_NE(plot.str().find("# panel |x-x*|\n0 1\n1 0.5\n"), std::string::npos);
    write_svg(svg, tr, {1.0}, {{0.5, 1.0}}, "t");
    EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
    EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}
