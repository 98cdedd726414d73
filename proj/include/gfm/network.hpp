#pragma once

#include <cmath>
#include <complex>

#include "gfm/dq.hpp"

namespace gfm {

/// Fixed series impedances of the converter filter and the grid, per-unit.
struct PlantParams {
    double x_f = 0.1;
    double x_g = 0.1;
    double r_f = 0.0;
    double r_g = 0.0;

    static PlantParams from_scr(double scr, double x_f = 0.1) {
        return PlantParams{x_f, 1.0 / scr, 0.0, 0.0};
    }

    double x_tot() const { return x_f + x_g; }
    double r_tot() const { return r_f + r_g; }
};

class InvalidPlant : public Error {
public:
    using Error::Error;
};

/// Throws InvalidPlant unless x_f > 0, x_g > 0, r_f >= 0 and r_g >= 0.
inline void validate(const PlantParams& plant) {
    if (!(plant.x_f > 0.0)) throw InvalidPlant("plant.x_f must be > 0");
    if (!(plant.x_g > 0.0)) throw InvalidPlant("plant.x_g must be > 0");
    if (!(plant.r_f >= 0.0)) throw InvalidPlant("plant.r_f must be >= 0");
    if (!(plant.r_g >= 0.0)) throw InvalidPlant("plant.r_g must be >= 0");
}

/// Grid voltage seen at the infinite bus. theta_g is unwrapped.
struct GridState {
    double v_g = 1.0;
    double theta_g = 0.0;
    double omega_g = 1.0;
};

struct NetworkSolution {
    DqPhasor i_o;
    DqPhasor v_o;
    double i_omag = 0.0;
    double p_o = 0.0;
    double q_o = 0.0;
};

/// Grid voltage expressed in the converter frame, delta = theta_ref - theta_g.
inline DqPhasor grid_phasor_in_converter_frame(const GridState& grid, double delta) {
    return {grid.v_g * std::cos(delta), -grid.v_g * std::sin(delta)};
}

/// Quasi-static solution of the series branch v_inv -> (r_f + j x_f) -> PCC -> (r_g + j x_g) -> grid.
/// Powers use P = v_d i_d + v_q i_q, Q = v_q i_d - v_d i_q; converter-to-grid is positive.
/// r_virtual is a controller-side resistance acting within the same sample: the
/// bridge produces v_inv - r_virtual * i_o.
inline NetworkSolution solve_branch(const DqPhasor& v_inv, const GridState& grid, double delta,
                                    const PlantParams& plant, double r_virtual = 0.0) {
    const std::complex<double> z_tot{plant.r_tot() + r_virtual, plant.x_tot()};
    if (z_tot == 0.0) throw InvalidPlant("degenerate branch impedance (r_tot = x_tot = 0)");

    const std::complex<double> v_g = grid_phasor_in_converter_frame(grid, delta).to_complex();
    const std::complex<double> i = (v_inv.to_complex() - v_g) / z_tot;
    const std::complex<double> v_o = v_g + std::complex<double>{plant.r_g, plant.x_g} * i;

    NetworkSolution sol;
    sol.i_o = DqPhasor::from_complex(i);
    sol.v_o = DqPhasor::from_complex(v_o);
    sol.i_omag = std::hypot(sol.i_o.d, sol.i_o.q);
    sol.p_o = sol.v_o.d * sol.i_o.d + sol.v_o.q * sol.i_o.q;
    sol.q_o = sol.v_o.q * sol.i_o.d - sol.v_o.d * sol.i_o.q;
    return sol;
}

}  // namespace gfm
