#include "pid/energy.hpp"

#include <cmath>

#include "pid/dynamics.hpp"
#include "pid/errors.hpp"

namespace pid {

UniformSeries EnergyLedger::e_ps_series() const {
    UniformSeries s;
    s.sample_interval = sample_interval;
    s.start_time = samples.empty() ? 0.0 : samples.front().time;
    s.values.reserve(samples.size());
    for (const auto& e : samples) s.values.push_back(e.e_ps);
    return s;
}

UniformSeries EnergyLedger::e_sys_series() const {
    UniformSeries s;
    s.sample_interval = sample_interval;
    s.start_time = samples.empty() ? 0.0 : samples.front().time;
    s.values.reserve(samples.size());
    for (const auto& e : samples) s.values.push_back(e.e_ps + e.e_pid);
    return s;
}

InstantEnergies instantaneous_energies(const SystemState& state, const ContactSet& contacts,
                                       const SystemConfig& cfg) {
    InstantEnergies out;
    const double z = state.ps_displacement;
    const double zdot = state.ps_velocity;
    out.e_ps = 0.5 * cfg.ps_mass() * zdot * zdot + 0.5 * cfg.ps.stiffness * z * z;

    const int n = static_cast<int>(state.granules.size());
    out.per_granule.assign(n, 0.0);
    if (n == 0) return out;

    const double m = cfg.layout.mass;
    const double inertia = 0.4 * m * cfg.layout.radius * cfg.layout.radius;
    for (int i = 0; i < n; ++i) {
        const auto& g = state.granules[i];
        out.per_granule[i] = 0.5 * m * dot(g.velocity, g.velocity) +
                             0.5 * inertia * g.spin * g.spin;
    }
    if (!contacts.empty()) {
        const EffectivePairParams gg =
            effective_params(cfg.layout.radius, cfg.layout.radius, m, m, cfg.material);
        const EffectivePairParams gw = effective_wall_params(cfg.layout.radius, m, cfg.material);
        for (const Contact& c : contacts) {
            const auto& p = (c.kind == ContactKind::GranuleGranule) ? gg : gw;
            const auto [share_i, share_j] = contact_potential_energy(c, p);
            out.per_granule[c.i] += share_i;
            if (c.kind == ContactKind::GranuleGranule) out.per_granule[c.j] += share_j;
        }
    }
    for (double e : out.per_granule) out.e_pid += e;
    return out;
}

double input_energy(const Trajectory& traj, const SystemConfig& cfg) {
    const double t0 = cfg.shock.duration;
    if (traj.times.empty() || traj.times.back() < t0)
        throw AnalysisError("input_energy: trajectory does not cover the shock window");
    double sum = 0.0;
    double prev_p = shock_force(traj.times[0], cfg.shock) * traj.ps_velocity[0];
    for (size_t k = 1; k < traj.times.size() && traj.times[k - 1] < t0; ++k) {
        const double p = shock_force(traj.times[k], cfg.shock) * traj.ps_velocity[k];
        sum += 0.5 * (prev_p + p) * (traj.times[k] - traj.times[k - 1]);
        prev_p = p;
    }
    return sum;
}

NormalizedMeasures normalized_measures(const EnergyLedger& ledger) {
    if (!(ledger.e_in > 0.0))
        throw AnalysisError("normalized_measures: zero input energy, normalization undefined");
    NormalizedMeasures m;
    const size_t n = ledger.samples.size();
    m.eta_pid.reserve(n);
    m.eta_ps.reserve(n);
    m.eta_sys.reserve(n);
    m.r_pid.reserve(n);
    m.r_ps.reserve(n);
    const double scale = 100.0 / ledger.e_in;
    for (const auto& s : ledger.samples) {
        m.eta_pid.push_back(scale * s.e_pid);
        m.eta_ps.push_back(scale * s.e_ps);
        m.eta_sys.push_back(scale * (s.e_pid + s.e_ps));
        m.r_pid.push_back(scale * (s.w_vis + s.w_f));
        m.r_ps.push_back(scale * s.w_ps);
    }
    return m;
}

double conservation_residual(const EnergySample& s) {
    if (!(s.e_in_so_far > 0.0)) return 0.0;
    return std::abs(s.e_ps + s.e_pid + s.w_ps + s.w_vis + s.w_f - s.e_in_so_far) / s.e_in_so_far;
}

}  // namespace pid
