#pragma once

#include <vector>

#include "pid/contact.hpp"
#include "pid/model.hpp"
#include "pid/series.hpp"
#include "pid/state.hpp"

namespace pid {

struct Trajectory;  // dynamics.hpp

/// One row of the energy ledger at the output stride. All components in J;
/// the cumulative work terms are nondecreasing and e_in_so_far is constant
/// once the shock has ended.
struct EnergySample {
    double time = 0.0;
    double e_ps = 0.0;
    double e_pid = 0.0;
    double w_ps = 0.0;
    double w_vis = 0.0;
    double w_f = 0.0;
    double e_in_so_far = 0.0;
    double f_d = 0.0;                 // N, net x reaction on the container walls
    std::vector<double> e_granules;   // per-granule shares (populated when recording granules)
};

struct EnergyLedger {
    std::vector<EnergySample> samples;
    double sample_interval = 0.0;
    double e_in = 0.0;         // J, total input shock energy
    double r_pid_final = 0.0;  // %, eventual PID dissipation share
    double r_ps_final = 0.0;   // %
    double max_residual = 0.0;  // worst conservation residual seen past the pulse

    UniformSeries e_ps_series() const;
    UniformSeries e_sys_series() const;
};

struct InstantEnergies {
    double e_ps = 0.0;
    double e_pid = 0.0;
    std::vector<double> per_granule;
};

/// Oscillator energy plus per-granule translational/rotational/contact-elastic
/// shares for one state.
InstantEnergies instantaneous_energies(const SystemState& state, const ContactSet& contacts,
                                       const SystemConfig& cfg);

/// Trapezoidal quadrature of F(t) * zdot(t) over the shock window from the
/// sampled trajectory. The ledger's e_in uses the integrator-resolution
/// accumulator instead; the two agree to quadrature accuracy.
double input_energy(const Trajectory& traj, const SystemConfig& cfg);

struct NormalizedMeasures {
    std::vector<double> eta_pid, eta_ps, eta_sys;  // instantaneous, percent
    std::vector<double> r_pid, r_ps;               // cumulative dissipation, percent
};

NormalizedMeasures normalized_measures(const EnergyLedger& ledger);

/// Conservation residual |(E_PS + E_PID + W_PS + W_vis + W_f) - E_in| / E_in
/// of one ledger row.
double conservation_residual(const EnergySample& s);

}  // namespace pid
