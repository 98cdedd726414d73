#pragma once

// Fast/slow internal-voltage-source mode selection from the output-current
// magnitude: enter Fast as soon as the current exceeds the switching threshold,
// return to Slow only after the current has stayed at or below
// hysteresis * threshold for a continuous dwell time.

#include <algorithm>

namespace gfm {

enum class IvsMode { Slow, Fast };

inline const char* to_string(IvsMode m) { return m == IvsMode::Fast ? "Fast" : "Slow"; }

struct SwitchParams {
    double i_switch = 0.94;    ///< entry threshold [p.u.]
    double hysteresis = 0.9;   ///< return threshold as a fraction of i_switch
    double t_1 = 0.2;          ///< dwell time [s]
};

struct SwitchState {
    IvsMode mode = IvsMode::Slow;
    double dwell_timer = 0.0;
};

/// Advances the state machine by one sample of length dt and returns the new mode.
inline IvsMode update(SwitchState& s, double i_omag, double dt, const SwitchParams& p) {
    if (s.mode == IvsMode::Slow) {
        if (i_omag > p.i_switch) s.mode = IvsMode::Fast;
        s.dwell_timer = 0.0;
        return s.mode;
    }
    if (i_omag <= p.hysteresis * p.i_switch) {
        s.dwell_timer = std::min(s.dwell_timer + dt, p.t_1);
        // Accumulated float steps land a few ulps short of t_1.
        if (s.dwell_timer >= p.t_1 - 1e-9 * dt) {
            s.mode = IvsMode::Slow;
            s.dwell_timer = 0.0;
        }
    } else {
        s.dwell_timer = 0.0;
    }
    return s.mode;
}

}  // namespace gfm
