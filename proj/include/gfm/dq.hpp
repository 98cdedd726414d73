#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gfm {

/// Nominal grid frequency used for all per-unit conversions [Hz].
inline constexpr double kNominalFrequencyHz = 50.0;
/// Angular frequency base [rad/s].
inline constexpr double kOmegaBase = 2.0 * std::numbers::pi * kNominalFrequencyHz;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-component per-unit quantity in the converter's rotating dq frame.
/// The d axis is aligned with the internal voltage reference.
struct DqPhasor {
    double d = 0.0;
    double q = 0.0;

    constexpr DqPhasor() = default;
    constexpr DqPhasor(double d_, double q_) : d(d_), q(q_) {}

    static DqPhasor from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }
    std::complex<double> to_complex() const { return {d, q}; }

    double magnitude() const { return std::hypot(d, q); }
    bool finite() const { return std::isfinite(d) && std::isfinite(q); }

    constexpr DqPhasor& operator+=(const DqPhasor& o) { d += o.d; q += o.q; return *this; }
    constexpr DqPhasor& operator-=(const DqPhasor& o) { d -= o.d; q -= o.q; return *this; }
    constexpr DqPhasor& operator*=(double k) { d *= k; q *= k; return *this; }

    friend constexpr DqPhasor operator+(DqPhasor a, const DqPhasor& b) { return a += b; }
    friend constexpr DqPhasor operator-(DqPhasor a, const DqPhasor& b) { return a -= b; }
    friend constexpr DqPhasor operator*(DqPhasor a, double k) { return a *= k; }
    friend constexpr DqPhasor operator*(double k, DqPhasor a) { return a *= k; }
    friend constexpr bool operator==(const DqPhasor&, const DqPhasor&) = default;
};

}  // namespace gfm
