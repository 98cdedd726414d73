#pragma once

// Serialization of simulation output: trace CSV, report JSON and small SVG
// line plots for quick inspection. Needs nlohmann/json on the include path.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "gfm/analysis.hpp"
#include "gfm/simulator.hpp"

namespace gfm::io {

/// Shortest decimal form that parses back to the same double.
inline std::string fmt(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) return "nan";
    return {buf, end};
}

inline constexpr std::string_view kTraceHeader =
    "t,v_g,theta_g_deg,omega_g_pu,delta_deg,omega_pu,p_o,q_o,i_omag,e_ref,x_v,p_ref1,mode";

/// Writes every `every`-th record (the first one always).
inline void write_trace_csv(std::ostream& os, const SimTrace& trace, std::size_t every = 1) {
    if (every == 0) every = 1;
    os << kTraceHeader << '\n';
    for (std::size_t i = 0; i < trace.records.size(); i += every) {
        const auto& r = trace.records[i];
        os << fmt(r.t) << ',' << fmt(r.v_g) << ',' << fmt(rad2deg(r.theta_g)) << ',' << fmt(r.omega_g) << ','
           << fmt(rad2deg(r.delta)) << ',' << fmt(r.omega) << ',' << fmt(r.p_o) << ',' << fmt(r.q_o) << ','
           << fmt(r.i_omag) << ',' << fmt(r.e_ref) << ',' << fmt(r.x_v) << ',' << fmt(r.p_ref1) << ','
           << to_string(r.mode) << '\n';
    }
}

inline nlohmann::json to_json(const SimReport& r) {
    nlohmann::json timeline = nlohmann::json::array();
    for (const auto& m : r.mode_timeline) timeline.push_back({{"t", m.t}, {"mode", to_string(m.mode)}});
    return {
        {"pole_slips", r.pole_slips},
        {"converged", r.converged},
        {"delta_final", r.delta_final},
        {"verdict", to_string(r.verdict)},
        {"peak_event_power", r.peak_event_power},
        {"mode_timeline", timeline},
        {"droop_power_ss", r.droop_power_ss},
        {"inertia_power_peak", r.inertia_power_peak},
    };
}

inline SimReport report_from_json(const nlohmann::json& j) {
    SimReport r;
    r.pole_slips = j.at("pole_slips").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.delta_final = j.at("delta_final").get<double>();
    const auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw Error("unknown verdict in report");
    r.verdict = *v;
    r.peak_event_power = j.at("peak_event_power").get<double>();
    for (const auto& m : j.at("mode_timeline")) {
        const auto mode = m.at("mode").get<std::string>();
        if (mode != "Slow" && mode != "Fast") throw Error("unknown mode in report: " + mode);
        r.mode_timeline.push_back({m.at("t").get<double>(), mode == "Fast" ? IvsMode::Fast : IvsMode::Slow});
    }
    r.droop_power_ss = j.at("droop_power_ss").get<double>();
    r.inertia_power_peak = j.at("inertia_power_peak").get<double>();
    return r;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool step = false;
};

namespace detail {

inline std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

inline void panel(std::ostringstream& os, const Series& s, double x0, double y0, double w, double h) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!s.x.empty()) {
        xmin = *std::min_element(s.x.begin(), s.x.end());
        xmax = *std::max_element(s.x.begin(), s.x.end());
        ymin = *std::min_element(s.y.begin(), s.y.end());
        ymax = *std::max_element(s.y.begin(), s.y.end());
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax - ymin < 1e-9) { ymin -= 0.5; ymax += 0.5; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * w; };
    auto py = [&](double y) { return y0 + h - (y - ymin) / (ymax - ymin) * h; };

    os << "<rect x='" << x0 << "' y='" << y0 << "' width='" << w << "' height='" << h
       << "' fill='none' stroke='#999'/>\n";
    os << "<text x='" << x0 + 4 << "' y='" << y0 + 14 << "' font-size='12'>" << escape(s.label) << "</text>\n";
    os << "<text x='" << x0 - 4 << "' y='" << y0 + 10 << "' font-size='10' text-anchor='end'>" << fmt(ymax)
       << "</text>\n";
    os << "<text x='" << x0 - 4 << "' y='" << y0 + h << "' font-size='10' text-anchor='end'>" << fmt(ymin)
       << "</text>\n";
    if (s.x.empty()) return;

    // Thin long traces to roughly one point per horizontal pixel pair.
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / static_cast<std::size_t>(2 * w));
    os << "<polyline fill='none' stroke='#1f5fa8' stroke-width='1' points='";
    double prev_y = s.y.front();
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
        if (s.step) os << px(s.x[i]) << ',' << py(prev_y) << ' ';
        os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        prev_y = s.y[i];
    }
    os << px(s.x.back()) << ',' << py(s.y.back()) << "'/>\n";
}

}  // namespace detail

/// Vertically stacked panels sharing the x axis.
inline std::string stacked_svg(const std::vector<Series>& series, std::string_view x_label) {
    const double w = 720, h = 140, left = 70, top = 20, gap = 20;
    const double total_h = top + static_cast<double>(series.size()) * (h + gap) + 30;
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << left + w + 20 << "' height='" << total_h
       << "' font-family='sans-serif'>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        detail::panel(os, series[i], left, top + static_cast<double>(i) * (h + gap), w, h);
    }
    os << "<text x='" << left + w / 2 << "' y='" << total_h - 8 << "' font-size='12' text-anchor='middle'>"
       << detail::escape(x_label) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

/// delta, P_o, I_omag and the IVS mode against time.
inline std::string quicklook_svg(const SimTrace& trace) {
    Series d{"delta [deg]", {}, {}}, p{"P_o [p.u.]", {}, {}}, i{"I_omag [p.u.]", {}, {}};
    Series m{"fast IVS enabled", {}, {}, true};
    for (const auto& r : trace.records) {
        for (auto* s : {&d, &p, &i, &m}) s->x.push_back(r.t);
        d.y.push_back(rad2deg(r.delta));
        p.y.push_back(r.p_o);
        i.y.push_back(r.i_omag);
        m.y.push_back(r.mode == IvsMode::Fast ? 1.0 : 0.0);
    }
    return stacked_svg({d, p, i, m}, "t [s]");
}

// ---------------------------------------------------------------------------
// Curves

inline const char* curve_column(analysis::CurveKind k) {
    switch (k) {
        case analysis::CurveKind::PDelta: return "p_o";
        case analysis::CurveKind::IDelta: return "i_omag";
        case analysis::CurveKind::IThMin: return "i_th_min";
    }
    return "y";
}

inline void write_curve_csv(std::ostream& os, analysis::CurveKind kind,
                            const std::vector<analysis::CurvePoint>& table) {
    os << (kind == analysis::CurveKind::IThMin ? "delta_th_deg," : "delta_deg,") << curve_column(kind) << '\n';
    for (const auto& pt : table) os << fmt(pt.x_deg) << ',' << fmt(pt.y) << '\n';
}

inline std::string curve_svg(analysis::CurveKind kind, const std::vector<analysis::CurvePoint>& table) {
    Series s{std::string(curve_column(kind)) + " [p.u.]", {}, {}};
    for (const auto& pt : table) {
        s.x.push_back(pt.x_deg);
        s.y.push_back(pt.y);
    }
    return stacked_svg({s}, kind == analysis::CurveKind::IThMin ? "delta_th [deg]" : "delta [deg]");
}

// ---------------------------------------------------------------------------
// Matrix

struct MatrixRow {
    std::string scenario;
    std::string variant;
    Verdict verdict = Verdict::LOS;
    int pole_slips = 0;
    double peak_event_power = 0.0;
    std::string error;  ///< non-empty when the run failed
};

inline void write_matrix_csv(std::ostream& os, const std::vector<MatrixRow>& rows) {
    os << "scenario,variant,verdict,pole_slips,peak_event_power\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.variant << ',' << (r.error.empty() ? to_string(r.verdict) : "error") << ','
           << r.pole_slips << ',' << fmt(r.peak_event_power) << '\n';
    }
}

inline std::string matrix_table(const std::vector<MatrixRow>& rows) {
    std::size_t ws = 8, wv = 7;
    for (const auto& r : rows) {
        ws = std::max(ws, r.scenario.size());
        wv = std::max(wv, r.variant.size());
    }
    auto padr = [](std::string s, std::size_t n) { s.resize(std::max(n, s.size()), ' '); return s; };
    std::ostringstream os;
    os << padr("scenario", ws) << "  " << padr("variant", wv) << "  " << padr("verdict", 16) << "  slips  peak_p\n";
    for (const auto& r : rows) {
        char peak[32];
        std::snprintf(peak, sizeof peak, "%.3f", r.peak_event_power);
        os << padr(r.scenario, ws) << "  " << padr(r.variant, wv) << "  "
           << padr(r.error.empty() ? to_string(r.verdict) : "error: " + r.error, 16) << "  "
           << padr(std::to_string(r.pole_slips), 5) << "  " << peak << '\n';
    }
    return os.str();
}

}  // namespace gfm::io
