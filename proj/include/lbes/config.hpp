#pragma once

// Experiment configuration files (JSON).
//
// A config names either a preset or an inline problem; the two are exclusive.
//
//   {
//     "preset": "m4",                        // or the inline keys below
//     "cost":   {"name": "power", "m": 4, "x_star": 1.0, "normalized": true},
//     "pair":   {"kind": "standard", "sigma": 1.0},
//     "design": {"order": 3, "kappa": [1], "epsilon": 1e-3, "split": "equal_magnitude"},
//     "x0":     [4.0],
//     "integrator": {"horizon": 10, "steps_per_fast_period": 64, "record_stride": 0},
//     "analysis":   {"window_width": 0.1, "floor_quantile": 0.1, "fit_start": 0.5, "fit_end": 9},
//     "output":     {"dir": "out", "trajectory": "trajectory.csv", "envelope": "envelope.csv",
//                    "fit": "fit.csv", "plot": "plot.dat", "svg": "plot.svg"},
//     "expect_divergence": false
//   }
//
// integrator, analysis, output and expect_divergence may accompany a preset and
// override its defaults.  Unknown keys are rejected.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbes/cost.hpp"
#include "lbes/dither.hpp"
#include "lbes/presets.hpp"
#include "lbes/simulator.hpp"

namespace lbes {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostSpec {
    std::string name = "power";  ///< power | quartic2d
    int m = 4;
    double x_star = 1.0;
    bool normalized = true;
    friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

struct PairSpec {
    PairKind kind = PairKind::standard;  ///< standard | gradient
    double sigma = 1.0;
    friend bool operator==(const PairSpec&, const PairSpec&) = default;
};

struct DesignSpec {
    std::optional<int> order;  ///< default m - 1 (standard pair) or 1 (gradient pair)
    std::vector<int> kappa{1};
    double epsilon = 1e-3;
    SplitRule split = SplitRule::equal_magnitude;
    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

struct InlineSpec {
    CostSpec cost;
    PairSpec pair;
    DesignSpec design;
    Point x0{4.0};
    friend bool operator==(const InlineSpec&, const InlineSpec&) = default;
};

struct IntegratorSpec {
    std::optional<double> horizon;
    std::optional<int> steps_per_fast_period;
    std::optional<std::size_t> record_stride;
    friend bool operator==(const IntegratorSpec&, const IntegratorSpec&) = default;
};

struct AnalysisSpec {
    std::optional<double> window_width;  ///< default max(eps, horizon / 100)
    double floor_quantile = 0.1;
    std::optional<double> fit_start;
    std::optional<double> fit_end;
    friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct OutputSpec {
    std::string dir = "out";
    std::string trajectory = "trajectory.csv";
    std::string envelope = "envelope.csv";
    std::string fit = "fit.csv";
    std::string plot = "plot.dat";
    std::string svg;  ///< empty: no SVG
    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ExperimentConfig {
    std::optional<std::string> preset;
    std::optional<InlineSpec> problem;
    IntegratorSpec integrator;
    AnalysisSpec analysis;
    OutputSpec output;
    std::optional<bool> expect_divergence;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

    [[nodiscard]] bool divergence_expected() const {
        if (expect_divergence) return *expect_divergence;
        return preset && preset_info(*preset).expect_divergence;
    }
};

namespace detail {

using nlohmann::json;

/// Line and column (1-based) of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw ConfigError("config field '" + field(it.key()) + "': unknown key");
        }
    }

    [[nodiscard]] bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <typename T>
    T get(const char* key) const {
        const auto& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                if (std::is_unsigned_v<T> && v.get<long long>() < 0) throw std::invalid_argument("must be >= 0");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            return v.get<T>();
        } catch (const std::exception& e) {
            throw ConfigError("config field '" + field(key) + "': " + e.what());
        }
    }

    template <typename T>
    void read(const char* key, T& out) const {
        if (has(key)) out = get<T>(key);
    }
    template <typename T>
    void read(const char* key, std::optional<T>& out) const {
        if (has(key)) out = get<T>(key);
    }

    template <typename T>
    std::vector<T> get_list(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError("config field '" + field(key) + "': expected an array");
        std::vector<T> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool ok = std::is_integral_v<T> ? v[i].is_number_integer() : v[i].is_number();
            if (!ok)
                throw ConfigError("config field '" + field(key) + "[" + std::to_string(i) + "]': expected a " +
                                  (std::is_integral_v<T> ? "integer" : "number"));
            out.push_back(v[i].get<T>());
        }
        return out;
    }

    [[nodiscard]] Reader section(const char* key) const { return Reader(j_.at(key), field(key)); }
    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config field '" + (path_.empty() ? std::string("<root>") : path_) + "': " + what);
    }
    void require(bool cond, const char* key, const std::string& what) const {
        if (!cond) throw ConfigError("config field '" + field(key) + "': " + what);
    }

private:
    const json& j_;
    std::string path_;
};

inline PairKind parse_pair_kind(const std::string& s, const std::string& field) {
    if (s == "standard") return PairKind::standard;
    if (s == "gradient") return PairKind::gradient;
    throw ConfigError("config field '" + field + "': pair kind must be 'standard' or 'gradient'");
}

inline SplitRule parse_split(const std::string& s, const std::string& field) {
    if (s == "equal_magnitude") return SplitRule::equal_magnitude;
    if (s == "unit_c1") return SplitRule::unit_c1;
    throw ConfigError("config field '" + field + "': split must be 'equal_magnitude' or 'unit_c1'");
}

inline const char* split_name(SplitRule s) { return s == SplitRule::unit_c1 ? "unit_c1" : "equal_magnitude"; }

}  // namespace detail

/// Parses config text; `source` names the origin in diagnostics.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        if (const auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }

    try {
        const detail::Reader root(j, "");
        root.allow({"preset", "cost", "pair", "design", "x0", "integrator", "analysis", "output", "expect_divergence"});
        ExperimentConfig cfg;

        const bool inline_keys = root.has("cost") || root.has("pair") || root.has("design") || root.has("x0");
        if (root.has("preset")) {
            if (inline_keys)
                throw ConfigError("config field 'preset': a preset excludes cost, pair, design and x0");
            cfg.preset = root.get<std::string>("preset");
            if (!is_preset(*cfg.preset)) throw ConfigError("config field 'preset': unknown preset '" + *cfg.preset + "'");
        } else {
            if (!root.has("cost") || !root.has("design") || !root.has("x0"))
                throw ConfigError("config: need either 'preset' or all of 'cost', 'design' and 'x0'");
            InlineSpec p;
            {
                const auto r = root.section("cost");
                r.allow({"name", "m", "x_star", "normalized"});
                r.read("name", p.cost.name);
                r.require(p.cost.name == "power" || p.cost.name == "quartic2d", "name",
                          "unknown cost '" + p.cost.name + "' (power, quartic2d)");
                r.read("m", p.cost.m);
                r.read("x_star", p.cost.x_star);
                r.read("normalized", p.cost.normalized);
                r.require(p.cost.m >= 2, "m", "must be >= 2");
                if (p.cost.name == "quartic2d") r.require(p.cost.m == 4, "m", "quartic2d has m = 4");
            }
            if (root.has("pair")) {
                const auto r = root.section("pair");
                r.allow({"kind", "sigma"});
                if (r.has("kind")) p.pair.kind = detail::parse_pair_kind(r.get<std::string>("kind"), r.field("kind"));
                r.read("sigma", p.pair.sigma);
                r.require(p.pair.sigma > 0.0, "sigma", "must be positive");
            }
            {
                const auto r = root.section("design");
                r.allow({"order", "kappa", "epsilon", "split"});
                r.read("order", p.design.order);
                if (r.has("kappa")) p.design.kappa = r.get_list<int>("kappa");
                r.read("epsilon", p.design.epsilon);
                if (r.has("split")) p.design.split = detail::parse_split(r.get<std::string>("split"), r.field("split"));
                r.require(!p.design.order || *p.design.order >= 1, "order", "must be >= 1");
                r.require(!p.design.kappa.empty(), "kappa", "must not be empty");
                for (int k : p.design.kappa) r.require(k >= 1, "kappa", "entries must be >= 1");
                r.require(p.design.epsilon > 0.0, "epsilon", "must be positive");
            }
            p.x0 = root.get_list<double>("x0");
            cfg.problem = std::move(p);
        }

        if (root.has("integrator")) {
            const auto r = root.section("integrator");
            r.allow({"horizon", "steps_per_fast_period", "record_stride"});
            r.read("horizon", cfg.integrator.horizon);
            r.read("steps_per_fast_period", cfg.integrator.steps_per_fast_period);
            r.read("record_stride", cfg.integrator.record_stride);
            r.require(!cfg.integrator.horizon || *cfg.integrator.horizon > 0.0, "horizon", "must be positive");
            r.require(!cfg.integrator.steps_per_fast_period || *cfg.integrator.steps_per_fast_period >= 16,
                      "steps_per_fast_period", "must be >= 16");
        }
        if (root.has("analysis")) {
            const auto r = root.section("analysis");
            r.allow({"window_width", "floor_quantile", "fit_start", "fit_end"});
            r.read("window_width", cfg.analysis.window_width);
            r.read("floor_quantile", cfg.analysis.floor_quantile);
            r.read("fit_start", cfg.analysis.fit_start);
            r.read("fit_end", cfg.analysis.fit_end);
            r.require(!cfg.analysis.window_width || *cfg.analysis.window_width > 0.0, "window_width",
                      "must be positive");
            r.require(cfg.analysis.floor_quantile > 0.0 && cfg.analysis.floor_quantile < 1.0, "floor_quantile",
                      "must lie in (0, 1)");
        }
        if (root.has("output")) {
            const auto r = root.section("output");
            r.allow({"dir", "trajectory", "envelope", "fit", "plot", "svg"});
            r.read("dir", cfg.output.dir);
            r.read("trajectory", cfg.output.trajectory);
            r.read("envelope", cfg.output.envelope);
            r.read("fit", cfg.output.fit);
            r.read("plot", cfg.output.plot);
            r.read("svg", cfg.output.svg);
        }
        root.read("expect_divergence", cfg.expect_divergence);
        return cfg;
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Serializes every set field; parse_config(to_json(c)) == c.
inline std::string to_json(const ExperimentConfig& cfg) {
    using detail::json;
    json j = json::object();
    if (cfg.preset) j["preset"] = *cfg.preset;
    if (cfg.problem) {
        const auto& p = *cfg.problem;
        j["cost"] = {{"name", p.cost.name}, {"m", p.cost.m}, {"x_star", p.cost.x_star}, {"normalized", p.cost.normalized}};
        j["pair"] = {{"kind", to_string(p.pair.kind)}, {"sigma", p.pair.sigma}};
        json d = {{"kappa", p.design.kappa}, {"epsilon", p.design.epsilon}, {"split", detail::split_name(p.design.split)}};
        if (p.design.order) d["order"] = *p.design.order;
        j["design"] = d;
        j["x0"] = p.x0;
    }
    json in = json::object();
    if (cfg.integrator.horizon) in["horizon"] = *cfg.integrator.horizon;
    if (cfg.integrator.steps_per_fast_period) in["steps_per_fast_period"] = *cfg.integrator.steps_per_fast_period;
    if (cfg.integrator.record_stride) in["record_stride"] = *cfg.integrator.record_stride;
    if (!in.empty()) j["integrator"] = in;
    json an = {{"floor_quantile", cfg.analysis.floor_quantile}};
    if (cfg.analysis.window_width) an["window_width"] = *cfg.analysis.window_width;
    if (cfg.analysis.fit_start) an["fit_start"] = *cfg.analysis.fit_start;
    if (cfg.analysis.fit_end) an["fit_end"] = *cfg.analysis.fit_end;
    j["analysis"] = an;
    j["output"] = {{"dir", cfg.output.dir},           {"trajectory", cfg.output.trajectory},
                   {"envelope", cfg.output.envelope}, {"fit", cfg.output.fit},
                   {"plot", cfg.output.plot},         {"svg", cfg.output.svg}};
    if (cfg.expect_divergence) j["expect_divergence"] = *cfg.expect_divergence;
    return j.dump(2) + "\n";
}

inline CostModel build_cost(const CostSpec& c) {
    if (c.name == "quartic2d") return make_quartic_2d();
    return make_power_cost(c.m, c.x_star, c.normalized);
}

/// Simulation configuration described by an experiment config.
inline ESConfig build_es_config(const ExperimentConfig& cfg) {
    if (cfg.preset.has_value() == cfg.problem.has_value())
        throw ConfigError("config: exactly one of preset and inline problem must be set");
    ESConfig es = [&] {
        if (cfg.preset) return preset(*cfg.preset);
        const auto& p = *cfg.problem;
        CostModel model = build_cost(p.cost);
        if (p.x0.size() != model.dimension())
            throw ConfigError("config field 'x0': expected " + std::to_string(model.dimension()) + " entries");
        const VectorFieldPair pair = p.pair.kind == PairKind::gradient ? gradient_pair(p.pair.sigma)
                                                                       : default_pair(p.pair.sigma);
        const int m = model.descriptor().m > 0 ? model.descriptor().m : p.cost.m;
        const int order = p.design.order.value_or(p.pair.kind == PairKind::gradient ? 1 : m - 1);
        DitherSpec spec;
        if (p.design.kappa.size() == 1 && model.dimension() == 1) {
            spec = design_dithers(order, p.design.kappa.front(), p.design.epsilon, p.design.split);
        } else {
            if (p.design.kappa.size() != model.dimension())
                throw ConfigError("config field 'design.kappa': expected " + std::to_string(model.dimension()) +
                                  " entries");
            try {
                spec = design_multivariable(order + 1, p.design.kappa, p.design.epsilon, p.design.split);
            } catch (const ResonanceError& e) {
                throw ConfigError(std::string("config field 'design.kappa': ") + e.what());
            }
        }
        return ESConfig{std::move(model), pair, std::move(spec), p.x0, 10.0, 64, 0};
    }();
    if (cfg.integrator.horizon) es.horizon = *cfg.integrator.horizon;
    if (cfg.integrator.steps_per_fast_period) es.steps_per_fast_period = *cfg.integrator.steps_per_fast_period;
    if (cfg.integrator.record_stride) es.record_stride = *cfg.integrator.record_stride;
    try {
        es.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return es;
}

/// Envelope window: the configured width, else max(eps, horizon / 100).
inline double window_width(const ExperimentConfig& cfg, const ESConfig& es) {
    if (cfg.analysis.window_width) return *cfg.analysis.window_width;
    return std::max(es.epsilon(), es.horizon / 100.0);
}

}  // namespace lbes
