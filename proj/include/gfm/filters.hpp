#pragma once

// First-order continuous blocks discretized with the bilinear (Tustin) transform.
// Cutoffs are given in rad/s; callers convert per-unit cutoffs with kOmegaBase.

namespace gfm {

/// y' = wc (u - y), unity DC gain.
class LowPass {
public:
    LowPass() = default;
    LowPass(double cutoff_rad_s, double dt) { configure(cutoff_rad_s, dt); }

    void configure(double cutoff_rad_s, double dt) {
        const double k = 0.5 * cutoff_rad_s * dt;
        a_ = (1.0 - k) / (1.0 + k);
        b_ = k / (1.0 + k);
    }

    /// Puts the filter in steady state at `value`.
    void reset(double value = 0.0) { y_ = value; u_ = value; }

    double step(double u) {
        y_ = a_ * y_ + b_ * (u + u_);
        u_ = u;
        return y_;
    }

    double output() const { return y_; }

private:
    double a_ = 1.0;
    double b_ = 0.0;
    double y_ = 0.0;
    double u_ = 0.0;
};

/// Washout s / (s + wc), zero DC gain.
class HighPass {
public:
    HighPass() = default;
    HighPass(double cutoff_rad_s, double dt) { configure(cutoff_rad_s, dt); }

    void configure(double cutoff_rad_s, double dt) {
        const double k = 0.5 * cutoff_rad_s * dt;
        a_ = (1.0 - k) / (1.0 + k);
        b_ = 1.0 / (1.0 + k);
    }

    /// Steady state for a constant input `input` (output 0).
    void reset(double input = 0.0) { y_ = 0.0; u_ = input; }

    double step(double u) {
        y_ = a_ * y_ + b_ * (u - u_);
        u_ = u;
        return y_;
    }

    double output() const { return y_; }

    /// The next output is free_response() + feedthrough() * next_input.
    double free_response() const { return a_ * y_ - b_ * u_; }
    double feedthrough() const { return b_; }

private:
    double a_ = 1.0;
    double b_ = 1.0;
    double y_ = 0.0;
    double u_ = 0.0;
};

}  // namespace gfm
