#pragma once

// Closed-form design relations for a voltage source behind a purely inductive
// branch: power-angle and current-angle curves, equilibrium points, the
// worst-case current threshold used by the fast/slow switching criterion, and
// the PCC-voltage expressions that explain why PCC-voltage based fast paths
// degrade in weak grids.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gfm/dq.hpp"
#include "gfm/network.hpp"

namespace gfm::analysis {

struct OperatingPoint {
    double e_ref = 1.1;
    double v_g = 1.0;
    double x_tot = 0.2;
    double p_ref = 0.0;
};

/// Stable and unstable equilibrium angles of the P-delta curve [rad].
struct EquilibriumPair {
    double delta_s = 0.0;
    double delta_u = std::numbers::pi;
};

class NoEquilibrium : public Error {
public:
    using Error::Error;
};

inline double p_of_delta(const OperatingPoint& op, double delta) {
    return op.e_ref * op.v_g * std::sin(delta) / op.x_tot;
}

inline EquilibriumPair equilibria(const OperatingPoint& op) {
    const double ratio = op.p_ref * op.x_tot / (op.e_ref * op.v_g);
    if (!(ratio <= 1.0)) {
        throw NoEquilibrium("no equilibrium: p_ref*x_tot/(e_ref*v_g) = " + std::to_string(ratio) + " > 1");
    }
    const double ds = std::asin(ratio);
    return {ds, std::numbers::pi - ds};
}

/// Output-current magnitude as a function of the power angle.
inline double i_omag_of_delta(double e_ref, double v_g, double x_f, double x_g, double delta) {
    const double radicand = e_ref * e_ref + v_g * v_g - 2.0 * e_ref * v_g * std::cos(delta);
    return std::sqrt(std::max(radicand, 0.0)) / (x_f + x_g);
}

/// Inverse of i_omag_of_delta on [0, pi]. Throws NoEquilibrium when the
/// current is outside the range the branch can carry.
inline double delta_of_i_omag(double e_ref, double v_g, double x_f, double x_g, double i_omag) {
    const double drop = i_omag * (x_f + x_g);
    const double c = (e_ref * e_ref + v_g * v_g - drop * drop) / (2.0 * e_ref * v_g);
    if (!(c >= -1.0 && c <= 1.0)) throw NoEquilibrium("current " + std::to_string(i_omag) + " is not reachable");
    return std::acos(c);
}

/// Current magnitude reached when the power angle equals delta_th.
inline double threshold_current(double e_ref, double v_g, double x_f, double x_g, double delta_th) {
    return i_omag_of_delta(e_ref, v_g, x_f, x_g, delta_th);
}

/// Grid voltage minimizing threshold_current for a given delta_th (clamped at 0).
inline double worst_case_vg(double e_ref, double delta_th) {
    return delta_th < std::numbers::pi / 2 ? e_ref * std::cos(delta_th) : 0.0;
}

/// Lower bound of threshold_current over v_g >= 0 and x_g <= x_g_max.
/// Below 90 deg this is e_ref*sin(delta_th)/(x_f + x_g_max); sin is used instead of
/// sqrt(1 - cos^2) so the curve has no cancellation near 90 deg.
inline double i_th_min(double e_ref, double x_f, double x_g_max, double delta_th) {
    const double x = x_f + x_g_max;
    return delta_th < std::numbers::pi / 2 ? e_ref * std::sin(delta_th) / x : e_ref / x;
}

/// a = x_g / x_tot: 0 for a stiff grid, 1 for an ultra-weak grid.
inline double grid_strength_factor(double x_g, double x_tot) { return x_g / x_tot; }

/// PCC q-axis voltage for the ideal source E = (e_ref, 0).
inline double v_oq_of_delta(double a, double v_g, double delta) {
    return -(1.0 - a) * v_g * std::sin(delta);
}

/// PCC voltage magnitude for the ideal source E = (e_ref, 0).
inline double v_omag_of_delta(double a, double e_ref, double v_g, double delta) {
    const double b = 1.0 - a;
    return std::sqrt(b * b * v_g * v_g + a * a * e_ref * e_ref + 2.0 * a * b * e_ref * v_g * std::cos(delta));
}

// ---------------------------------------------------------------------------
// Curve tables

enum class CurveKind { PDelta, IDelta, IThMin };

struct CurveParams {
    double e_ref = 1.1;
    double v_g = 1.0;
    double x_f = 0.1;
    /// Grid reactance; for IThMin this is the largest grid reactance considered.
    double x_g = 1.0;
};

struct CurvePoint {
    double x_deg = 0.0;
    double y = 0.0;
};

/// n evenly spaced samples on [lo, hi] inclusive.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out;
    if (n == 0) return out;
    if (n == 1) return {lo};
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    return out;
}

inline std::vector<CurvePoint> curve_table(CurveKind kind, const CurveParams& p,
                                           std::span<const double> angles_deg) {
    std::vector<CurvePoint> table;
    table.reserve(angles_deg.size());
    for (double deg : angles_deg) {
        const double rad = deg2rad(deg);
        double y = 0.0;
        switch (kind) {
            case CurveKind::PDelta:
                y = p_of_delta({p.e_ref, p.v_g, p.x_f + p.x_g, 0.0}, rad);
                break;
            case CurveKind::IDelta:
                y = i_omag_of_delta(p.e_ref, p.v_g, p.x_f, p.x_g, rad);
                break;
            case CurveKind::IThMin:
                y = i_th_min(p.e_ref, p.x_f, p.x_g, rad);
                break;
        }
        table.push_back({deg, y});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Steady operating point of the full converter model

/// Internal voltage magnitude and power angle of a converged, synchronized operating point.
struct SteadyState {
    double e_ref = 1.0;
    double delta = 0.0;
};

/// Solves for (e_ref, delta) such that the branch delivers `p_target` (optionally scaled
/// by the PCC voltage magnitude) while the PCC voltage magnitude equals the Q-V droop
/// reference v_n - k_rpc * q_o. Newton iteration on the exact branch solution.
inline SteadyState solve_steady_state(double p_target, double v_g, const PlantParams& plant, double k_rpc,
                                      double v_n, bool scale_power_by_vomag = false) {
    auto residual = [&](double e, double d, double& f1, double& f2) {
        const GridState grid{v_g, 0.0, 1.0};
        const NetworkSolution s = solve_branch({e, 0.0}, grid, d, plant);
        const double vomag = s.v_o.magnitude();
        const double p_want = scale_power_by_vomag ? p_target * vomag : p_target;
        f1 = s.p_o - p_want;
        f2 = vomag - (v_n - k_rpc * s.q_o);
    };

    SteadyState x{v_n, 0.0};
    const double ratio = p_target * plant.x_tot() / (v_n * std::max(v_g, 1e-9));
    if (std::abs(ratio) < 1.0) x.delta = std::asin(ratio);

    for (int it = 0; it < 100; ++it) {
        double f1, f2;
        residual(x.e_ref, x.delta, f1, f2);
        if (std::abs(f1) + std::abs(f2) < 1e-14) return x;
        constexpr double h = 1e-7;
        double a1, a2, b1, b2;
        residual(x.e_ref + h, x.delta, a1, a2);
        residual(x.e_ref, x.delta + h, b1, b2);
        const double j11 = (a1 - f1) / h, j12 = (b1 - f1) / h;
        const double j21 = (a2 - f2) / h, j22 = (b2 - f2) / h;
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || det == 0.0) break;
        x.e_ref -= (j22 * f1 - j12 * f2) / det;
        x.delta -= (-j21 * f1 + j11 * f2) / det;
        if (!std::isfinite(x.e_ref) || !std::isfinite(x.delta)) break;
    }
    double f1, f2;
    residual(x.e_ref, x.delta, f1, f2);
    if (!(std::abs(f1) + std::abs(f2) < 1e-9) || x.delta < 0.0 - 1e-12 || x.delta > std::numbers::pi / 2) {
        throw NoEquilibrium("no steady operating point for p = " + std::to_string(p_target));
    }
    return x;
}

}  // namespace gfm::analysis
