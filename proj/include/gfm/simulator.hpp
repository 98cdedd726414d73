#pragma once

// Closed-loop fixed-step simulation of the converter against a scripted grid,
// plus the synchronism and grid-forming-capability metrics computed from the
// resulting trace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfm/analysis.hpp"
#include "gfm/controller.hpp"
#include "gfm/ivs_switch.hpp"
#include "gfm/network.hpp"
#include "gfm/scenario.hpp"

namespace gfm {

struct SimRecord {
    double t = 0.0;
    double v_g = 0.0;
    double theta_g = 0.0;
    double omega_g = 1.0;
    double delta = 0.0;
    double omega = 1.0;
    double p_o = 0.0;
    double q_o = 0.0;
    double i_omag = 0.0;
    double e_ref = 0.0;
    double x_v = 0.0;
    double p_ref1 = 0.0;
    IvsMode mode = IvsMode::Slow;
};

struct SimTrace {
    double dt = 0.0;
    std::vector<SimRecord> records;
};

enum class Verdict { Stable, ReSyncAfterSlips, LOS };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::ReSyncAfterSlips: return "ReSyncAfterSlips";
        case Verdict::LOS: return "LOS";
    }
    return "?";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
    for (auto v : {Verdict::Stable, Verdict::ReSyncAfterSlips, Verdict::LOS}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

struct ModeChange {
    double t = 0.0;
    IvsMode mode = IvsMode::Slow;
    friend bool operator==(const ModeChange&, const ModeChange&) = default;
};

struct SimReport {
    int pole_slips = 0;
    bool converged = false;
    double delta_final = 0.0;
    Verdict verdict = Verdict::LOS;
    double peak_event_power = 0.0;
    std::vector<ModeChange> mode_timeline;
    double droop_power_ss = 0.0;
    double inertia_power_peak = 0.0;
    friend bool operator==(const SimReport&, const SimReport&) = default;
};

struct SimResult {
    SimTrace trace;
    SimReport report;
};

struct SimOptions {
    double settle_time = 1.0;           ///< pre-roll before t = 0 [s]
    double settle_tolerance = 1e-5;     ///< max |omega - omega_g| after the pre-roll [p.u.]
    double convergence_window = 0.5;    ///< trailing window for the convergence test [s]
    double convergence_angle = deg2rad(2.0);
    double convergence_frequency = 1e-3;
    double event_window = 0.5;          ///< window after the first event for peak_event_power [s]
};

class InitializationError : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t index, double t)
        : Error("non-finite state at record " + std::to_string(index) + " (t = " + std::to_string(t) + " s)"),
          index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class MetricWindowError : public Error {
public:
    using Error::Error;
};

/// Number of pole slips in an unwrapped angle trace. Slip k (in either
/// direction) is counted once delta - delta(0) has travelled past the midpoint
/// to the k-th 2*pi boundary; from there the angle settles on the next
/// equilibrium rather than swinging back, so a resync that approaches
/// delta(0) + 2*pi from below still counts.
inline int detect_pole_slips(std::span<const double> delta) {
    if (delta.empty()) return 0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double hi = 0.0, lo = 0.0;
    for (double d : delta) {
        hi = std::max(hi, d - delta.front());
        lo = std::min(lo, d - delta.front());
    }
    return static_cast<int>(std::floor(hi / two_pi + 0.5)) + static_cast<int>(std::floor(-lo / two_pi + 0.5));
}

struct CapabilityMetrics {
    double peak_event_power = 0.0;
    double droop_power_ss = 0.0;
    double inertia_power_peak = 0.0;
};

struct RampWindow {
    double begin = 0.0;
    double end = 0.0;
};

/// Grid-forming service metrics of a trace. The event window starts at
/// event_time; the inertia window is the frequency ramp, when there is one.
inline CapabilityMetrics capability_metrics(const SimTrace& trace, double event_time, double p_m, double d_droop,
                                            std::optional<RampWindow> ramp = std::nullopt,
                                            double event_window = 0.5, double ss_window = 0.5) {
    const auto& r = trace.records;
    if (r.empty()) throw MetricWindowError("empty trace");
    const double t0 = r.front().t;
    const double t1 = r.back().t;
    const double eps = 0.5 * trace.dt;
    if (event_time < t0 - eps || event_time + event_window > t1 + eps) {
        throw MetricWindowError("event window exceeds the trace");
    }
    if (t1 - t0 < ss_window - eps) throw MetricWindowError("steady-state window exceeds the trace");
    if (ramp && (ramp->begin < t0 - eps || ramp->end > t1 + eps)) {
        throw MetricWindowError("ramp window exceeds the trace");
    }

    CapabilityMetrics m;
    double p_pre = r.front().p_o;
    for (const auto& rec : r) {
        if (rec.t < event_time - eps) p_pre = rec.p_o;
    }
    bool any = false;
    for (const auto& rec : r) {
        if (rec.t >= event_time - eps && rec.t <= event_time + event_window + eps) {
            const double v = rec.p_o - p_pre;
            m.peak_event_power = any ? std::max(m.peak_event_power, v) : v;
            any = true;
        }
    }

    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : r) {
        if (rec.t >= t1 - ss_window - eps) {
            sum += rec.p_o - p_m;
            ++n;
        }
    }
    m.droop_power_ss = n ? sum / static_cast<double>(n) : 0.0;

    if (ramp) {
        any = false;
        for (const auto& rec : r) {
            if (rec.t >= ramp->begin - eps && rec.t <= ramp->end + eps) {
                const double v = rec.p_o - p_m - d_droop * (1.0 - rec.omega_g);
                m.inertia_power_peak = any ? std::max(m.inertia_power_peak, v) : v;
                any = true;
            }
        }
    }
    return m;
}

namespace detail {

inline std::optional<RampWindow> first_ramp(const Scenario& sc) {
    for (const auto& ev : sc.events) {
        if (const auto* r = std::get_if<Rocof>(&ev.kind)) return RampWindow{ev.at, ev.at + r->duration};
    }
    return std::nullopt;
}

inline bool finite(const ControllerState& s) {
    return std::isfinite(s.theta_ref) && std::isfinite(s.omega) && std::isfinite(s.e_ref) && s.v_inv.finite() &&
           std::isfinite(s.p_ref1) && std::isfinite(s.x_v);
}

}  // namespace detail

/// Stability verdict and convergence test over the trailing window.
inline void classify(const SimTrace& trace, const SimOptions& opt, SimReport& rep) {
    const auto& r = trace.records;
    std::vector<double> delta;
    delta.reserve(r.size());
    for (const auto& rec : r) delta.push_back(rec.delta);
    rep.pole_slips = detect_pole_slips(delta);
    rep.delta_final = r.back().delta;
    const double t_from = r.back().t - opt.convergence_window - 0.5 * trace.dt;
    rep.converged = true;
    for (const auto& rec : r) {
        if (rec.t < t_from) continue;
        if (std::abs(rec.delta - rep.delta_final) >= opt.convergence_angle ||
            std::abs(rec.omega - rec.omega_g) >= opt.convergence_frequency) {
            rep.converged = false;
            break;
        }
    }
    if (!rep.converged) rep.verdict = Verdict::LOS;
    else rep.verdict = rep.pole_slips == 0 ? Verdict::Stable : Verdict::ReSyncAfterSlips;
}

/// Runs the scenario at the fixed step params.dt. Each step: grid state, branch
/// solve with the command computed in the previous step, mode selection, then
/// the controller update that produces the next command.
inline SimResult run(const Scenario& sc, ControlVariant variant, const ControlParams& params,
                     const SimOptions& opt = {}) {
    validate(sc);
    validate(params);
    const double dt = params.dt;
    const FastPaths paths = fast_paths_for(variant);
    const bool starts_fast = variant == ControlVariant::FastIVS;

    // Analytic equilibrium at the undisturbed grid.
    analysis::SteadyState eq;
    try {
        eq = analysis::solve_steady_state(sc.p_m, sc.v_g0, sc.plant, params.k_rpc, params.v_n, starts_fast);
    } catch (const analysis::NoEquilibrium& e) {
        throw InitializationError(e.what());
    }
    if (!params.e_ref_limits.contains(eq.e_ref)) {
        throw InitializationError("steady internal voltage " + std::to_string(eq.e_ref) + " outside e_ref limits");
    }

    const auto steps_pre = static_cast<long>(std::llround(opt.settle_time / dt));
    const double t_start = -static_cast<double>(steps_pre) * dt;
    const GridState g0 = grid_state_at(sc, t_start);
    const NetworkSolution sol0 = solve_branch({eq.e_ref, 0.0}, g0, eq.delta, sc.plant);
    const double p_ref1_0 =
        fast_ivs_power_ref(params, sc.p_m, sol0.v_o.magnitude(), sol0.i_omag, starts_fast, paths);
    ControllerState cs = make_controller_state(params, sol0, eq.e_ref, eq.delta + g0.theta_g, p_ref1_0);
    SwitchState sw;
    sw.mode = starts_fast ? IvsMode::Fast : IvsMode::Slow;
    const SwitchParams swp = params.switch_params();

    const auto steps_main = static_cast<long>(std::floor(sc.t_end / dt + 1e-9));
    SimResult out;
    out.trace.dt = dt;
    out.trace.records.reserve(static_cast<std::size_t>(steps_main) + 1);

    for (long k = -steps_pre; k <= steps_main; ++k) {
        const double t = static_cast<double>(k) * dt;
        const GridState grid = grid_state_at(sc, t);
        const double theta_ref = cs.theta_ref;
        const double delta = theta_ref - grid.theta_g;
        const NetworkSolution sol = solve_branch(cs.v_inv, grid, delta, sc.plant, cs.r_virtual);

        IvsMode mode = IvsMode::Slow;
        switch (variant) {
            case ControlVariant::SlowIVS: mode = IvsMode::Slow; break;
            case ControlVariant::FastIVS: mode = IvsMode::Fast; break;
            default: mode = update(sw, sol.i_omag, dt, swp); break;
        }

        step_controller(cs, params, measurements_from(sol), sc.p_m, mode == IvsMode::Fast, paths);

        if (k == 0 && std::abs(cs.omega - grid.omega_g) >= opt.settle_tolerance) {
            throw InitializationError("pre-roll did not settle: |omega - omega_g| = " +
                                      std::to_string(std::abs(cs.omega - grid.omega_g)));
        }
        if (k < 0) continue;

        SimRecord rec{t,        grid.v_g,  grid.theta_g, grid.omega_g, delta,     cs.omega,
                      sol.p_o,  sol.q_o,   sol.i_omag,   cs.e_ref,     cs.x_v,    cs.p_ref1,
                      mode};
        if (!detail::finite(cs) || !std::isfinite(sol.p_o) || !std::isfinite(sol.q_o) || !std::isfinite(delta)) {
            throw NonFiniteState(out.trace.records.size(), t);
        }
        if (out.report.mode_timeline.empty() || out.report.mode_timeline.back().mode != mode) {
            out.report.mode_timeline.push_back({t, mode});
        }
        out.trace.records.push_back(rec);
    }

    classify(out.trace, opt, out.report);

    const double t_last = out.trace.records.back().t;
    if (!sc.events.empty() && sc.events.front().at + opt.event_window <= t_last + 0.5 * dt &&
        t_last >= opt.convergence_window) {
        const auto m = capability_metrics(out.trace, sc.events.front().at, sc.p_m, params.d_droop,
                                          detail::first_ramp(sc), opt.event_window, opt.convergence_window);
        out.report.peak_event_power = m.peak_event_power;
        out.report.droop_power_ss = m.droop_power_ss;
        out.report.inertia_power_peak = m.inertia_power_peak;
    } else if (t_last >= opt.convergence_window) {
        const auto m = capability_metrics(out.trace, 0.0, sc.p_m, params.d_droop, std::nullopt, 0.0,
                                          opt.convergence_window);
        out.report.droop_power_ss = m.droop_power_ss;
    }
    return out;
}

}  // namespace gfm
