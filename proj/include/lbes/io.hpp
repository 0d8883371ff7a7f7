#pragma once

// CSV and plot-data writers.  Numbers use 17 significant digits so files
// round-trip doubles and are byte-identical across runs of the same config.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbes/analysis.hpp"
#include "lbes/iterated_integrals.hpp"
#include "lbes/simulator.hpp"

namespace lbes {

namespace detail {

inline std::ostream& full_precision(std::ostream& os) {
    os << std::setprecision(17) << std::defaultfloat;
    return os;
}

inline double distance(const Point& x, const Point& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}

}  // namespace detail

/// Header `t,x_1,...,x_n,J`, one row per recorded sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    detail::full_precision(os);
    os << "t";
    for (std::size_t i = 0; i < traj.states.front().size(); ++i) os << ",x_" << i + 1;
    os << ",J\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << traj.times[k];
        for (double v : traj.states[k]) os << ',' << v;
        os << ',' << traj.costs[k] << '\n';
    }
}

/// Reads a CSV written by write_trajectory_csv (costs and states only).
inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,", 0) != 0)
        throw std::invalid_argument("read_trajectory_csv: missing 't,x_1,...,J' header");
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 3) throw std::invalid_argument("read_trajectory_csv: need at least t, x_1 and J columns");
    Trajectory traj;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::invalid_argument("read_trajectory_csv: row " + std::to_string(row) + ": bad number '" +
                                            cell + "'");
            }
        }
        if (v.size() != columns)
            throw std::invalid_argument("read_trajectory_csv: row " + std::to_string(row) + " has " +
                                        std::to_string(v.size()) + " columns, expected " + std::to_string(columns));
        traj.times.push_back(v.front());
        traj.states.emplace_back(v.begin() + 1, v.end() - 1);
        traj.costs.push_back(v.back());
    }
    if (traj.empty()) throw std::invalid_argument("read_trajectory_csv: no samples");
    return traj;
}

inline void write_envelope_csv(std::ostream& os, const Envelope& env) {
    detail::full_precision(os);
    os << "t,e\n";
    for (const auto& p : env) os << p.t << ',' << p.e << '\n';
}

inline void write_fit_header(std::ostream& os) { os << "kind,rate,prefactor,floor,r_squared,t_start,t_end,points\n"; }

inline void write_fit_row(std::ostream& os, const DecayFit& f) {
    detail::full_precision(os);
    os << to_string(f.kind) << ',' << f.rate << ',' << f.prefactor << ',' << f.floor << ',' << f.r_squared << ','
       << f.t_start << ',' << f.t_end << ',' << f.points << '\n';
}

inline void write_fit_summary(std::ostream& os, const DecayFit& f) {
    os << std::setprecision(6);
    if (f.kind == DecayKind::exponential)
        os << "  exponential  gamma = " << f.rate << "  lambda' = " << f.prefactor << "  rho = " << f.floor;
    else
        os << "  polynomial   slope = " << f.rate << "  A = " << f.prefactor;
    os << "  R^2 = " << f.r_squared << "  window = [" << f.t_start << ", " << f.t_end << "]  points = " << f.points
       << '\n';
}

/// Certification table: word, check, value, bound, pass.
inline void write_certificate_csv(std::ostream& os, const Certificate& cert) {
    detail::full_precision(os);
    os << "word,check,value,bound,pass\n";
    for (const auto& r : cert.rows) {
        os << format_word(r.word) << ',' << to_string(r.check) << ',' << r.value << ',';
        if (r.check == CertificateCheck::info)
            os << ",";
        else
            os << r.bound << ',' << (r.pass ? "true" : "false");
        os << '\n';
    }
}

/// Gnuplot-style blocks: "# panel ..." header, two columns, blank-line separated.
/// Panel 0 is |x - x*|; panels 1..n are the coordinates.
inline void write_plot_data(std::ostream& os, const Trajectory& traj, const Point& x_star) {
    if (traj.empty()) throw std::invalid_argument("write_plot_data: empty trajectory");
    detail::full_precision(os);
    os << "# panel |x-x*|\n";
    for (std::size_t k = 0; k < traj.size(); ++k) os << traj.times[k] << ' ' << detail::distance(traj.states[k], x_star) << '\n';
    for (std::size_t i = 0; i < x_star.size(); ++i) {
        os << "\n\n# panel x_" << i + 1 << '\n';
        for (std::size_t k = 0; k < traj.size(); ++k) os << traj.times[k] << ' ' << traj.states[k][i] << '\n';
    }
}

/// Static SVG of log10 |x - x*| against t, with the envelope overlaid when given.
inline void write_svg(std::ostream& os, const Trajectory& traj, const Point& x_star, const Envelope& env = {},
                      const std::string& title = "") {
    if (traj.empty()) throw std::invalid_argument("write_svg: empty trajectory");
    constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 40;
    constexpr double floor_err = 1e-16;
    const double t_max = std::max(traj.times.back(), 1e-300);
    double lo = 1e300, hi = -1e300;
    std::vector<double> le(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        le[k] = std::log10(std::max(detail::distance(traj.states[k], x_star), floor_err));
        lo = std::min(lo, le[k]);
        hi = std::max(hi, le[k]);
    }
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (hi <= lo) hi = lo + 1;
    auto px = [&](double t) { return L + (W - L - R) * t / t_max; };
    auto py = [&](double l) { return T + (H - T - B) * (hi - l) / (hi - lo); };

    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); ++d)
        os << "<text x=\"" << L - 45 << "\" y=\"" << py(d) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">1e"
           << d << "</text>\n";
    os << "<text x=\"" << W - R - 60 << "\" y=\"" << H - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">t = "
       << std::setprecision(3) << t_max << "</text>\n"
       << std::setprecision(2);

    // thin out to at most ~4000 vertices
    const std::size_t step = std::max<std::size_t>(1, traj.size() / 4000);
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < traj.size(); k += step) os << px(traj.times[k]) << ',' << py(le[k]) << ' ';
    os << "\"/>\n";
    if (!env.empty()) {
        os << "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : env) os << px(p.t) << ',' << py(std::log10(std::max(p.e, floor_err))) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
}

/// Opens `path` for writing or throws with the path in the message.
inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

}  // namespace lbes
