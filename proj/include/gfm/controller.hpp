#pragma once

// Grid-forming controller: active power control (droop + inertia + washed-out
// damping), Q-V droop, single-loop voltage magnitude integrator with active
// damping, adaptive virtual impedance, and the three fast-IVS paths (PCC
// q-voltage feedforward, PCC-voltage scaled power reference, power
// reference vs. current droop) that are switched in by the IVS mode.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "gfm/dq.hpp"
#include "gfm/filters.hpp"
#include "gfm/ivs_switch.hpp"
#include "gfm/network.hpp"

namespace gfm {

struct Limits {
    double min = 0.0;
    double max = 1.0;
    double clamp(double x) const { return std::clamp(x, min, max); }
    bool contains(double x) const { return x >= min && x <= max; }
};

/// Controller gains and thresholds. Frequencies marked p.u. are multiplied by
/// kOmegaBase before use.
struct ControlParams {
    double d_droop = 50.0;      ///< P-omega droop D
    double k_p = 0.02;          ///< APC proportional (damping) gain
    double h = 10.0;            ///< inertia constant [s]
    double k_rpc = 0.1;         ///< Q-V droop
    double w_q = 1.0;           ///< reactive power LPF cutoff [p.u.]
    double k_iv = 6.28;         ///< SLVM integral gain [1/s]
    double r_ad = 0.1;          ///< active damping resistance
    double w_hpf = 0.1;         ///< active damping washout cutoff [p.u.]
    double w_kp = 1.0;          ///< APC proportional-path washout cutoff [p.u.]
    double k_x = 1.45;          ///< adaptive VI reactance gain
    double n_xr = 5.0;          ///< adaptive VI X/R ratio
    double i_th = 1.1;          ///< VI activation threshold
    double i_lim = 1.5;         ///< design current limit
    double w_lpfx = 0.2;        ///< VI current-magnitude LPF cutoff [p.u.]
    double w_lpfv = 0.2;        ///< PCC voltage-magnitude and VI-drop LPF cutoff [p.u.]
    double k_pvq = 0.34;        ///< HSC gain
    double w_hsc = 0.017;       ///< HSC feedforward washout cutoff [p.u.]
    double i_pth = 1.1;         ///< power-reference droop threshold
    double n_droop = 10.0;      ///< power-reference droop coefficient
    double i_switch = 0.94;     ///< fast/slow switching threshold
    double t_1 = 0.2;           ///< fast->slow dwell time [s]
    double v_n = 1.0;           ///< nominal voltage
    double w_n = 1.0;           ///< nominal frequency [p.u.]
    Limits e_ref_limits{0.0, 1.2};
    Limits p_ref1_limits{0.0, 1.0};
    double dt = 100e-6;         ///< control period [s]

    SwitchParams switch_params() const { return {i_switch, 0.9, t_1}; }
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

inline void validate(const ControlParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidParams(std::string("invalid control parameter: ") + what);
    };
    for (auto [v, name] : {std::pair{p.d_droop, "d_droop"}, {p.k_p, "k_p"}, {p.k_rpc, "k_rpc"},
                           {p.w_q, "w_q"}, {p.k_iv, "k_iv"}, {p.r_ad, "r_ad"}, {p.w_hpf, "w_hpf"}, {p.w_kp, "w_kp"},
                           {p.k_x, "k_x"}, {p.w_lpfx, "w_lpfx"}, {p.w_lpfv, "w_lpfv"}, {p.k_pvq, "k_pvq"},
                           {p.w_hsc, "w_hsc"}, {p.n_droop, "n_droop"}}) {
        require(v >= 0.0 && std::isfinite(v), name);
    }
    require(p.h > 0.0, "h > 0");
    require(p.n_xr > 0.0, "n_xr > 0");
    require(p.i_pth < p.i_lim, "i_pth < i_lim");
    require(p.i_switch < p.i_lim, "i_switch < i_lim");
    require(p.t_1 > 0.0, "t_1 > 0");
    require(p.dt > 0.0, "dt > 0");
    require(p.e_ref_limits.min <= p.e_ref_limits.max, "e_ref_limits ordered");
    require(p.p_ref1_limits.min <= p.p_ref1_limits.max, "p_ref1_limits ordered");
}

/// Which fast-IVS paths are wired in when the fast mode is enabled.
struct FastPaths {
    bool hsc = true;
    bool vomag_scaling = true;
    bool current_droop = true;
};

/// Control schemes compared in the experiments.
enum class ControlVariant { SlowIVS, FastIVS, AdaptiveNoDroop, Adaptive };

inline const char* to_string(ControlVariant v) {
    switch (v) {
        case ControlVariant::SlowIVS: return "slow";
        case ControlVariant::FastIVS: return "fast";
        case ControlVariant::AdaptiveNoDroop: return "adaptive-nodroop";
        case ControlVariant::Adaptive: return "adaptive";
    }
    return "?";
}

inline std::optional<ControlVariant> parse_control_variant(std::string_view name) {
    for (auto v : {ControlVariant::SlowIVS, ControlVariant::FastIVS, ControlVariant::AdaptiveNoDroop,
                   ControlVariant::Adaptive}) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

inline FastPaths fast_paths_for(ControlVariant v) {
    return {true, true, v != ControlVariant::AdaptiveNoDroop};
}

/// Everything the controller carries from one sample to the next.
struct ControllerState {
    double theta_ref = 0.0;
    double delta_omega = 0.0;
    double omega = 1.0;
    double e_ref = 1.0;
    double x_v = 0.0;
    double r_v = 0.0;
    double p_ref1 = 0.0;
    bool fast_ivs_enabled = false;

    LowPass lpf_q;
    LowPass lpf_vomag;
    LowPass lpf_iomag;
    LowPass lpf_vzd;
    LowPass lpf_vzq;
    HighPass hpf_id;
    HighPass hpf_iq;
    HighPass hpf_dp;
    HighPass hpf_voq;

    double apc_input_prev = 0.0;
    double slvm_error_prev = 0.0;
    DqPhasor v_z;
    /// Command for the next sample, excluding the active-damping term that
    /// depends on that sample's current; see r_virtual.
    DqPhasor v_inv;
    /// Same-sample part of the active damping: the bridge voltage is
    /// v_inv - r_virtual * i_o.
    double r_virtual = 0.0;

    DqPhasor bridge_voltage(const DqPhasor& i_o) const { return v_inv - r_virtual * i_o; }
};

struct Measurements {
    double p_o = 0.0;
    double q_o = 0.0;
    DqPhasor i_o;
    double i_omag = 0.0;
    double v_omag = 0.0;
    double v_oq = 0.0;
};

struct FilteredMeasurements {
    double q_o = 0.0;
    double v_omag = 0.0;
    double i_omag = 0.0;
    DqPhasor i_o_hpf;
};

inline Measurements measurements_from(const NetworkSolution& s) {
    return {s.p_o, s.q_o, s.i_o, s.i_omag, s.v_o.magnitude(), s.v_o.q};
}

inline DqPhasor compose_inverter_voltage(double e_ref, const DqPhasor& v_z, const DqPhasor& i_o_hpf, double r_ad) {
    return {e_ref - v_z.d - r_ad * i_o_hpf.d, -v_z.q - r_ad * i_o_hpf.q};
}

/// Builds a controller state sitting exactly at the steady operating point `sol`
/// with internal voltage (e_ref, 0) and angle theta_ref.
inline ControllerState make_controller_state(const ControlParams& p, const NetworkSolution& sol, double e_ref,
                                             double theta_ref, double p_ref1) {
    ControllerState s;
    s.theta_ref = theta_ref;
    s.e_ref = e_ref;
    s.p_ref1 = p_ref1;
    s.omega = p.w_n;

    s.lpf_q.configure(p.w_q * kOmegaBase, p.dt);
    s.lpf_vomag.configure(p.w_lpfv * kOmegaBase, p.dt);
    s.lpf_iomag.configure(p.w_lpfx * kOmegaBase, p.dt);
    s.lpf_vzd.configure(p.w_lpfv * kOmegaBase, p.dt);
    s.lpf_vzq.configure(p.w_lpfv * kOmegaBase, p.dt);
    s.hpf_id.configure(p.w_hpf * kOmegaBase, p.dt);
    s.hpf_iq.configure(p.w_hpf * kOmegaBase, p.dt);
    s.hpf_dp.configure(p.w_kp * kOmegaBase, p.dt);
    s.hpf_voq.configure(p.w_hsc * kOmegaBase, p.dt);

    s.lpf_q.reset(sol.q_o);
    s.lpf_vomag.reset(sol.v_o.magnitude());
    s.lpf_iomag.reset(sol.i_omag);
    s.hpf_id.reset(sol.i_o.d);
    s.hpf_iq.reset(sol.i_o.q);
    s.hpf_dp.reset(0.0);
    s.hpf_voq.reset(sol.v_o.q);

    s.x_v = p.k_x * std::max(0.0, sol.i_omag - p.i_th);
    s.r_v = s.x_v / p.n_xr;
    const DqPhasor vz{sol.i_o.d * s.r_v - sol.i_o.q * s.x_v, sol.i_o.q * s.r_v + sol.i_o.d * s.x_v};
    s.lpf_vzd.reset(vz.d);
    s.lpf_vzq.reset(vz.q);
    s.v_z = vz;
    s.r_virtual = p.r_ad * s.hpf_id.feedthrough();
    s.v_inv = compose_inverter_voltage(e_ref, vz, {s.hpf_id.free_response(), s.hpf_iq.free_response()}, p.r_ad);
    return s;
}

/// Advances the measurement filters one sample.
inline FilteredMeasurements step_filters(ControllerState& s, const Measurements& m) {
    FilteredMeasurements f;
    f.q_o = s.lpf_q.step(m.q_o);
    f.v_omag = s.lpf_vomag.step(m.v_omag);
    f.i_omag = s.lpf_iomag.step(m.i_omag);
    f.i_o_hpf = {s.hpf_id.step(m.i_o.d), s.hpf_iq.step(m.i_o.q)};
    return f;
}

struct ApcOutput {
    double theta_ref = 0.0;
    double omega = 1.0;
};

/// Swing-form APC: 2H d(dw)/dt = (p_ref1 - p_o) - D dw, plus K_p (p_ref1 - p_o)
/// through the washout so the steady-state droop gain stays 1/D.
inline ApcOutput step_apc(ControllerState& s, const ControlParams& p, double p_ref1, double p_o_meas,
                          double d_omega_q) {
    const double u = p_ref1 - p_o_meas;
    const double a = p.dt / (4.0 * p.h);
    s.delta_omega = ((1.0 - a * p.d_droop) * s.delta_omega + a * (u + s.apc_input_prev)) / (1.0 + a * p.d_droop);
    s.apc_input_prev = u;
    const double damping = p.k_p * s.hpf_dp.step(u);
    s.omega = p.w_n * (1.0 + s.delta_omega + damping + d_omega_q);
    s.theta_ref += s.omega * kOmegaBase * p.dt;
    return {s.theta_ref, s.omega};
}

/// Q-V droop around the nominal voltage with zero reactive power reference.
inline double step_rpc(const ControlParams& p, double q_o_filtered) { return p.v_n - p.k_rpc * q_o_filtered; }

/// Voltage-magnitude integrator with clamping; integration stops at the limits.
inline double step_slvm(ControllerState& s, const ControlParams& p, double v_ref, double v_omag_filtered) {
    const double err = v_ref - v_omag_filtered;
    s.e_ref = p.e_ref_limits.clamp(s.e_ref + 0.5 * p.k_iv * p.dt * (err + s.slvm_error_prev));
    s.slvm_error_prev = err;
    return s.e_ref;
}

struct ViOutput {
    DqPhasor v_z;
    double x_v = 0.0;
    double r_v = 0.0;
};

/// Unfiltered virtual-impedance drop (R_v + jX_v) * i_o.
inline DqPhasor vi_drop(const DqPhasor& i_o, double x_v, double r_v) {
    return {i_o.d * r_v - i_o.q * x_v, i_o.q * r_v + i_o.d * x_v};
}

inline ViOutput step_adaptive_vi(ControllerState& s, const ControlParams& p, double i_omag_lpf, const DqPhasor& i_o) {
    s.x_v = p.k_x * std::max(0.0, i_omag_lpf - p.i_th);
    s.r_v = s.x_v / p.n_xr;
    const DqPhasor raw = vi_drop(i_o, s.x_v, s.r_v);
    s.v_z = {s.lpf_vzd.step(raw.d), s.lpf_vzq.step(raw.q)};
    return {s.v_z, s.x_v, s.r_v};
}

/// Power reference after the fast-IVS adjustments (identity in slow mode).
inline double fast_ivs_power_ref(const ControlParams& p, double p_ref, double v_omag_filtered, double i_omag_lpf,
                                 bool enabled, const FastPaths& paths = {}) {
    if (!enabled) return p_ref;
    double p1 = paths.vomag_scaling ? p_ref * v_omag_filtered : p_ref;
    if (paths.current_droop) p1 -= p.n_droop * std::max(0.0, i_omag_lpf - p.i_pth);
    return p.p_ref1_limits.clamp(p1);
}

inline double hsc_feedforward(const ControlParams& p, double v_oq_meas, bool enabled) {
    return enabled ? p.k_pvq * v_oq_meas : 0.0;
}

/// One full control period: consumes the measurements of this sample and leaves
/// the inverter voltage command for the next one in s.v_inv / s.r_virtual.
inline DqPhasor step_controller(ControllerState& s, const ControlParams& p, const Measurements& m, double p_ref,
                                bool fast_enabled, const FastPaths& paths = {}) {
    s.fast_ivs_enabled = fast_enabled;
    const FilteredMeasurements f = step_filters(s, m);

    // The washout runs in both modes so that enabling the feedforward is bumpless.
    const double v_oq_washed = s.hpf_voq.step(m.v_oq);
    const double d_omega_q = paths.hsc ? hsc_feedforward(p, v_oq_washed, fast_enabled) : 0.0;
    s.p_ref1 = fast_ivs_power_ref(p, p_ref, f.v_omag, f.i_omag, fast_enabled, paths);

    step_apc(s, p, s.p_ref1, m.p_o, d_omega_q);
    const double v_ref = step_rpc(p, f.q_o);
    step_slvm(s, p, v_ref, f.v_omag);
    step_adaptive_vi(s, p, f.i_omag, m.i_o);
    // The damping washout passes current steps straight through, so its
    // feedthrough is applied within the next sample instead of a sample late.
    const DqPhasor hpf_free{s.hpf_id.free_response(), s.hpf_iq.free_response()};
    s.r_virtual = p.r_ad * s.hpf_id.feedthrough();
    s.v_inv = compose_inverter_voltage(s.e_ref, s.v_z, hpf_free, p.r_ad);
    return s.v_inv;
}

}  // namespace gfm
