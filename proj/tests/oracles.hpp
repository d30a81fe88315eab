#pragma once

// Independent reference computations used by the tests. These deliberately
// avoid the library's own code paths.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

struct DampedOscillator {
    double mass;
    double stiffness;
    double damping;

    double omega_n() const { return std::sqrt(stiffness / mass); }
    double zeta() const { return damping / (2.0 * std::sqrt(stiffness * mass)); }
    double omega_d() const { return omega_n() * std::sqrt(1.0 - zeta() * zeta()); }
    double lambda() const { return damping / (2.0 * mass); }

    /// Closed-form free response from (z0, v0).
    double displacement(double t, double z0, double v0) const {
        const double wd = omega_d();
        const double lam = lambda();
        const double a = z0;
        const double b = (v0 + lam * z0) / wd;
        return std::exp(-lam * t) * (a * std::cos(wd * t) + b * std::sin(wd * t));
    }
    double velocity(double t, double z0, double v0) const {
        const double wd = omega_d();
        const double lam = lambda();
        const double a = z0;
        const double b = (v0 + lam * z0) / wd;
        const double e = std::exp(-lam * t);
        const double zc = a * std::cos(wd * t) + b * std::sin(wd * t);
        const double zs = -a * wd * std::sin(wd * t) + b * wd * std::cos(wd * t);
        return e * (zs - lam * zc);
    }

    /// Unit-impulse response h(t) = e^{-lam t} sin(wd t) / (m wd).
    double impulse_response(double t) const {
        if (t < 0.0) return 0.0;
        return std::exp(-lambda() * t) * std::sin(omega_d() * t) / (mass * omega_d());
    }

    /// Forced response from rest via the convolution integral, fine-grid
    /// Simpson quadrature over the force support.
    double forced_displacement(double t, const std::function<double(double)>& force,
                               double force_end, int steps = 20001) const {
        const double upper = std::min(t, force_end);
        if (upper <= 0.0) return 0.0;
        if (steps % 2 == 0) ++steps;
        const double h = upper / (steps - 1);
        double sum = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double tau = k * h;
            const double w = (k == 0 || k == steps - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            sum += w * force(tau) * impulse_response(t - tau);
        }
        return sum * h / 3.0;
    }
};

/// Trapezoid quadrature over uniformly sampled values.
inline double trapezoid(const std::vector<double>& v, double dt) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (size_t k = 1; k + 1 < v.size(); ++k) s += v[k];
    return s * dt;
}

inline std::mt19937_64 rng(unsigned seed = 0xfeedu) { return std::mt19937_64(seed); }

}  // namespace oracle
