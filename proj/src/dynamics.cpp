#include "pid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pid/errors.hpp"
#include "pid/log.hpp"

namespace pid {

namespace {

// Penetrations below this carry negligible force/energy and do not count as
// collisions; resting layouts sit exactly at zero gap and must keep the large
// step. Horizon factor: slow-down margin so the geometric step ramp completes
// before a predicted closure lands.
constexpr double kActivePenetration = 1e-9;  // m
constexpr double kClosureHorizon = 3.0;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

long Trajectory::collision_count() const {
    long n = 0;
    for (const auto& e : events)
        if (e.onset) ++n;
    return n;
}

UniformSeries Trajectory::ps_velocity_series() const {
    UniformSeries s;
    s.start_time = times.empty() ? 0.0 : times.front();
    s.sample_interval = sample_interval;
    s.values = ps_velocity;
    return s;
}

Engine::Engine(const SystemConfig& cfg) : cfg_(cfg) {
    const auto violations = validate_config(cfg);
    if (has_errors(violations)) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations)
            if (v.severity == Violation::Severity::Error)
                msg += "\n  " + v.field + ": " + v.message;
        throw ConfigError(msg);
    }
    const int n = cfg.layout.count;
    if (n > 0) {
        pair_ = effective_params(cfg.layout.radius, cfg.layout.radius, cfg.layout.mass,
                                 cfg.layout.mass, cfg.material);
        wall_ = effective_wall_params(cfg.layout.radius, cfg.layout.mass, cfg.material);
        inv_m_g_ = 1.0 / cfg.layout.mass;
        const double inertia = 0.4 * cfg.layout.mass * cfg.layout.radius * cfg.layout.radius;
        inv_i_g_ = 1.0 / inertia;
    }
    m_ps_ = cfg.ps_mass();
    inv_m_ps_ = 1.0 / m_ps_;
    two_d_ = cfg.layout.mode == LayoutMode::TwoDimensional;
    ramp_ratio_ = std::pow(cfg.integrator.dt_contact / cfg.integrator.dt_free,
                           1.0 / cfg.integrator.ramp_steps);
    current_dt_ = cfg.integrator.dt_free;

    k1_.granules.resize(n);
    k2_.granules.resize(n);
    k3_.granules.resize(n);
    k4_.granules.resize(n);
    s2_.granules.resize(n);
    s3_.granules.resize(n);
    s4_.granules.resize(n);
    contacts_.reserve(4 * n + n * n);
}

SystemState Engine::initial_state() const {
    SystemState s;
    s.granules.resize(cfg_.layout.count);
    for (int i = 0; i < cfg_.layout.count; ++i)
        s.granules[i].position = cfg_.layout.initial_centers[i];
    return s;
}

void Engine::eval(const SystemState& state, StateDerivative& out) const {
    const int n = static_cast<int>(state.granules.size());
    out.granules.resize(n);
    for (int i = 0; i < n; ++i) {
        out.granules[i].velocity = state.granules[i].velocity;
        out.granules[i].acceleration = {0.0, 0.0};
        out.granules[i].spin = state.granules[i].spin;
        out.granules[i].spin_accel = 0.0;
    }
    out.f_d = 0.0;
    out.power = StagePower{};

    detect_contacts_into(state, cfg_, contacts_);
    const bool clamp = cfg_.integrator.clamp_attractive_normal;
    const double mu = cfg_.material.friction_mu;
    const double ks = cfg_.material.friction_smoothing;
    const double radius = cfg_.layout.radius;

    for (const Contact& c : contacts_) {
        const EffectivePairParams& p = (c.kind == ContactKind::GranuleGranule) ? pair_ : wall_;
        const double sqrt_d = std::sqrt(c.penetration);
        const double elastic = p.hertz_coeff * c.penetration * sqrt_d;
        const double gamma = p.damping_scale * std::sqrt(sqrt_d);
        double applied = elastic + gamma * c.penetration_rate;
        if (clamp && applied < 0.0) applied = 0.0;

        Vec2 force = -applied * c.normal;
        out.power.viscous += (applied - elastic) * c.penetration_rate;

        double torque = 0.0;
        if (two_d_ && mu > 0.0) {
            const double tanh_slip = std::tanh(ks * c.slip_rate);
            const double n_mag = std::abs(applied);
            const double ft = -mu * n_mag * tanh_slip;
            force += ft * c.tangent;
            torque = radius * ft;
            out.power.friction += mu * n_mag * tanh_slip * c.slip_rate;
        }

        out.granules[c.i].acceleration += force * inv_m_g_;
        out.granules[c.i].spin_accel += torque * inv_i_g_;
        if (c.kind == ContactKind::GranuleGranule) {
            out.granules[c.j].acceleration -= force * inv_m_g_;
            out.granules[c.j].spin_accel += torque * inv_i_g_;
        } else {
            out.f_d -= force.x;  // reaction on the wall
        }
    }

    const double f_shock = shock_force(state.time, cfg_.shock);
    const double z = state.ps_displacement;
    const double zdot = state.ps_velocity;
    out.ps_velocity = zdot;
    out.ps_acceleration =
        (f_shock + out.f_d - cfg_.ps.damping * zdot - cfg_.ps.stiffness * z) * inv_m_ps_;
    out.power.ps_damping = cfg_.ps.damping * zdot * zdot;
    out.power.shock_input = f_shock * zdot;
}

void Engine::stage_state(const SystemState& base, const StateDerivative& k, double h,
                         SystemState& out) const {
    out.time = base.time + h;
    out.ps_displacement = base.ps_displacement + h * k.ps_velocity;
    out.ps_velocity = base.ps_velocity + h * k.ps_acceleration;
    const int n = static_cast<int>(base.granules.size());
    out.granules.resize(n);
    for (int i = 0; i < n; ++i) {
        out.granules[i].position = base.granules[i].position + h * k.granules[i].velocity;
        out.granules[i].velocity = base.granules[i].velocity + h * k.granules[i].acceleration;
        out.granules[i].angle = base.granules[i].angle + h * k.granules[i].spin;
        out.granules[i].spin = base.granules[i].spin + h * k.granules[i].spin_accel;
    }
}

StateDerivative Engine::derivatives(const SystemState& state) const {
    StateDerivative out;
    eval(state, out);
    return out;
}

SystemState Engine::rk4_step(const SystemState& state, double dt) const {
    if (!(dt > 0.0)) throw SimulationError("rk4_step: dt must be positive");
    eval(state, k1_);
    stage_state(state, k1_, dt / 2.0, s2_);
    eval(s2_, k2_);
    stage_state(state, k2_, dt / 2.0, s3_);
    eval(s3_, k3_);
    stage_state(state, k3_, dt, s4_);
    eval(s4_, k4_);

    SystemState next;
    next.time = state.time + dt;
    const double w = dt / 6.0;
    next.ps_displacement =
        state.ps_displacement +
        w * (k1_.ps_velocity + 2.0 * k2_.ps_velocity + 2.0 * k3_.ps_velocity + k4_.ps_velocity);
    next.ps_velocity = state.ps_velocity + w * (k1_.ps_acceleration + 2.0 * k2_.ps_acceleration +
                                                2.0 * k3_.ps_acceleration + k4_.ps_acceleration);
    const int n = static_cast<int>(state.granules.size());
    next.granules.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& a = k1_.granules[i];
        const auto& b = k2_.granules[i];
        const auto& c = k3_.granules[i];
        const auto& d = k4_.granules[i];
        next.granules[i].position =
            state.granules[i].position +
            w * (a.velocity + 2.0 * b.velocity + 2.0 * c.velocity + d.velocity);
        next.granules[i].velocity =
            state.granules[i].velocity +
            w * (a.acceleration + 2.0 * b.acceleration + 2.0 * c.acceleration + d.acceleration);
        next.granules[i].angle =
            state.granules[i].angle + w * (a.spin + 2.0 * b.spin + 2.0 * c.spin + d.spin);
        next.granules[i].spin =
            state.granules[i].spin +
            w * (a.spin_accel + 2.0 * b.spin_accel + 2.0 * c.spin_accel + d.spin_accel);
    }
    if (!finite(next.ps_displacement) || !finite(next.ps_velocity))
        throw SimulationError("rk4_step produced a non-finite state (blow-up)");
    return next;
}

Engine::Survey Engine::survey(const SystemState& s) const {
    Survey sv;
    const int n = static_cast<int>(s.granules.size());
    const double R = cfg_.layout.radius;
    const double z = s.ps_displacement;
    const double dt1 = cfg_.integrator.dt_free;
    // static slow-down zone applies only to approaches fast enough to cross
    // it during a ramp; resting stacks with micro-jitter stay on the free step
    const double v_static = cfg_.integrator.proximity_gap / (cfg_.integrator.ramp_steps * dt1);
    const bool small = n <= 8;

    auto consider = [&](double gap, double closing, int bit, bool wall) {
        if (gap < -kActivePenetration) {
            sv.contact_active = true;
            if (small) {
                if (wall)
                    sv.wall_mask |= (1ull << bit);
                else
                    sv.pair_mask |= (1ull << bit);
            } else {
                sv.keys.push_back(static_cast<std::uint32_t>(wall ? (1u << 30) | bit : bit));
            }
            return;
        }
        if (closing <= 0.0) return;
        if (gap - kClosureHorizon * closing * dt1 < -kActivePenetration)
            sv.slow_down = true;
        else if (closing > v_static && gap < cfg_.integrator.proximity_gap)
            sv.slow_down = true;
    };

    for (int i = 0; i < n; ++i) {
        const Vec2 pos = s.granules[i].position;
        const Vec2 vel = s.granules[i].velocity;
        for (int j = i + 1; j < n; ++j) {
            const Vec2 d = s.granules[j].position - pos;
            const double dist = norm(d);
            const double gap = dist - 2.0 * R;
            double closing = 0.0;
            if (dist > 0.0) closing = -dot(d, s.granules[j].velocity - vel) / dist;
            consider(gap, closing, small ? i * 8 + j : i * 1024 + j, false);
        }
        consider((pos.x - z) - R, -(vel.x - s.ps_velocity), i * 4 + 0, true);
        consider((z + cfg_.container.length) - pos.x - R, vel.x - s.ps_velocity, i * 4 + 1, true);
        if (two_d_) {
            consider(pos.y - R, -vel.y, i * 4 + 2, true);
            consider(cfg_.container.height - pos.y - R, vel.y, i * 4 + 3, true);
        }
    }
    if (!small) std::sort(sv.keys.begin(), sv.keys.end());
    return sv;
}

std::pair<SystemState, StepMode> Engine::advance(const SystemState& state) {
    const Survey sv = survey(state);
    const StepMode mode =
        (sv.contact_active || sv.slow_down) ? StepMode::Contact : StepMode::FreeFlight;
    const double target =
        mode == StepMode::Contact ? cfg_.integrator.dt_contact : cfg_.integrator.dt_free;
    if (current_dt_ > target)
        current_dt_ = std::max(target, current_dt_ * ramp_ratio_);
    else if (current_dt_ < target)
        current_dt_ = std::min(target, current_dt_ / ramp_ratio_);
    return {rk4_step(state, current_dt_), mode};
}

EnergySample Engine::measure(const SystemState& state, double w_ps, double w_vis, double w_f,
                             double e_in, bool per_granule) const {
    eval(state, k1_);  // refreshes contacts_ and f_d at this state
    EnergySample es;
    es.time = state.time;
    es.w_ps = w_ps;
    es.w_vis = w_vis;
    es.w_f = w_f;
    es.e_in_so_far = e_in;
    es.f_d = k1_.f_d;
    InstantEnergies ie = instantaneous_energies(state, contacts_, cfg_);
    es.e_ps = ie.e_ps;
    es.e_pid = ie.e_pid;
    if (per_granule) es.e_granules = std::move(ie.per_granule);
    return es;
}

SimulationResult Engine::run(const SimulateOptions& opts) {
    const auto& it = cfg_.integrator;
    const double stride = it.output_stride;
    const double t0 = cfg_.shock.duration;

    SimulationResult result;
    Trajectory& traj = result.trajectory;
    EnergyLedger& ledger = result.ledger;
    traj.sample_interval = stride;
    ledger.sample_interval = stride;

    SystemState state = initial_state();
    current_dt_ = it.dt_free;
    double w_ps = 0.0, w_vis = 0.0, w_f = 0.0, e_in = 0.0;

    auto emit = [&](const SystemState& s, double wp, double wv, double wf, double ei) {
        traj.times.push_back(s.time);
        traj.ps_displacement.push_back(s.ps_displacement);
        traj.ps_velocity.push_back(s.ps_velocity);
        if (opts.record_granules) traj.granule_samples.push_back(s.granules);
        ledger.samples.push_back(measure(s, wp, wv, wf, ei, opts.record_granules));
    };

    emit(state, 0.0, 0.0, 0.0, 0.0);

    Survey prev = survey(state);
    StepMode prev_mode =
        (prev.contact_active || prev.slow_down) ? StepMode::Contact : StepMode::FreeFlight;
    traj.mode_log.emplace_back(0.0, prev_mode);

    size_t sample_index = 1;
    bool stop = false;
    const int n = cfg_.layout.count;
    const bool small = n <= 8;

    while (!stop) {
        const Survey sv = survey(state);
        if (small) {
            std::uint64_t changed = sv.pair_mask ^ prev.pair_mask;
            while (changed) {
                const int bit = __builtin_ctzll(changed);
                changed &= changed - 1;
                traj.events.push_back({state.time, (sv.pair_mask >> bit) & 1ull
                                                       ? true
                                                       : false,
                                       ContactKind::GranuleGranule, bit / 8, bit % 8,
                                       WallId::Left});
            }
            changed = sv.wall_mask ^ prev.wall_mask;
            while (changed) {
                const int bit = __builtin_ctzll(changed);
                changed &= changed - 1;
                traj.events.push_back({state.time, (sv.wall_mask >> bit) & 1ull ? true : false,
                                       ContactKind::GranuleWall, bit / 4, -1,
                                       static_cast<WallId>(bit % 4)});
            }
        } else if (sv.keys != prev.keys) {
            auto log_key = [&](std::uint32_t key, bool onset) {
                if (key & (1u << 30)) {
                    const int bit = static_cast<int>(key & ~(1u << 30));
                    traj.events.push_back({state.time, onset, ContactKind::GranuleWall, bit / 4,
                                           -1, static_cast<WallId>(bit % 4)});
                } else {
                    traj.events.push_back({state.time, onset, ContactKind::GranuleGranule,
                                           static_cast<int>(key / 1024),
                                           static_cast<int>(key % 1024), WallId::Left});
                }
            };
            for (std::uint32_t key : sv.keys)
                if (!std::binary_search(prev.keys.begin(), prev.keys.end(), key))
                    log_key(key, true);
            for (std::uint32_t key : prev.keys)
                if (!std::binary_search(sv.keys.begin(), sv.keys.end(), key))
                    log_key(key, false);
        }
        prev = sv;

        const StepMode mode =
            (sv.contact_active || sv.slow_down) ? StepMode::Contact : StepMode::FreeFlight;
        if (mode != prev_mode) {
            traj.mode_log.emplace_back(state.time, mode);
            prev_mode = mode;
        }
        const double target = mode == StepMode::Contact ? it.dt_contact : it.dt_free;
        if (current_dt_ > target)
            current_dt_ = std::max(target, current_dt_ * ramp_ratio_);
        else if (current_dt_ < target)
            current_dt_ = std::min(target, current_dt_ / ramp_ratio_);
        const double dt = current_dt_;

        // one RK4 macro step; the stage derivatives stay in k1_..k4_ so the
        // work integrals below use the same stage weights as the state
        const SystemState next = rk4_step(state, dt);
        const double w = dt / 6.0;
        const double w_ps_next =
            w_ps + w * (k1_.power.ps_damping + 2.0 * k2_.power.ps_damping +
                        2.0 * k3_.power.ps_damping + k4_.power.ps_damping);
        const double w_vis_next = w_vis + w * (k1_.power.viscous + 2.0 * k2_.power.viscous +
                                               2.0 * k3_.power.viscous + k4_.power.viscous);
        const double w_f_next = w_f + w * (k1_.power.friction + 2.0 * k2_.power.friction +
                                           2.0 * k3_.power.friction + k4_.power.friction);
        const double e_in_next =
            e_in + w * (k1_.power.shock_input + 2.0 * k2_.power.shock_input +
                        2.0 * k3_.power.shock_input + k4_.power.shock_input);

        // uniform-stride output; linear interpolation across the step
        while (!stop) {
            const double ts = stride * static_cast<double>(sample_index);
            if (ts > next.time + 1e-12 * stride) break;
            const double theta = (ts - state.time) / dt;
            SystemState mid;
            mid.time = ts;
            mid.ps_displacement =
                state.ps_displacement + theta * (next.ps_displacement - state.ps_displacement);
            mid.ps_velocity = state.ps_velocity + theta * (next.ps_velocity - state.ps_velocity);
            mid.granules.resize(n);
            for (int i = 0; i < n; ++i) {
                const auto& ga = state.granules[i];
                const auto& gb = next.granules[i];
                auto& gm = mid.granules[i];
                gm.position = ga.position + theta * (gb.position - ga.position);
                gm.velocity = ga.velocity + theta * (gb.velocity - ga.velocity);
                gm.angle = ga.angle + theta * (gb.angle - ga.angle);
                gm.spin = ga.spin + theta * (gb.spin - ga.spin);
                if (!finite(gm.position.x) || !finite(gm.position.y) || !finite(gm.velocity.x) ||
                    !finite(gm.velocity.y) || !finite(gm.spin))
                    throw SimulationError("simulation blew up (non-finite granule state) at t=" +
                                          std::to_string(ts));
            }
            emit(mid, w_ps + theta * (w_ps_next - w_ps), w_vis + theta * (w_vis_next - w_vis),
                 w_f + theta * (w_f_next - w_f), e_in + theta * (e_in_next - e_in));

            const EnergySample& es = ledger.samples.back();
            if (ts >= t0 && es.e_in_so_far > 0.0) {
                const double residual = conservation_residual(es);
                ledger.max_residual = std::max(ledger.max_residual, residual);
                if (residual > it.conservation_tol) {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf),
                                  "energy conservation violated at t=%.6f s: residual %.3e "
                                  "exceeds tolerance %.3e",
                                  ts, residual, it.conservation_tol);
                    throw SimulationError(buf);
                }
            }
            if (ts >= 5.0 * t0 &&
                es.e_ps + es.e_pid <= it.energy_floor * es.e_in_so_far)
                stop = true;
            ++sample_index;
        }

        state = next;
        w_ps = w_ps_next;
        w_vis = w_vis_next;
        w_f = w_f_next;
        e_in = e_in_next;
        if (state.time >= it.t_max) stop = true;
    }

    ledger.e_in = e_in;
    if (!ledger.samples.empty() && e_in > 0.0) {
        const EnergySample& last = ledger.samples.back();
        ledger.r_pid_final = 100.0 * (last.w_vis + last.w_f) / e_in;
        ledger.r_ps_final = 100.0 * last.w_ps / e_in;
    }
    PID_LOG_INFO("run finished: t_end=%.3f s, samples=%zu, collisions=%ld, max residual=%.2e",
                 state.time, ledger.samples.size(), traj.collision_count(), ledger.max_residual);
    return result;
}

StateDerivative derivatives(const SystemState& state, const SystemConfig& cfg) {
    return Engine(cfg).derivatives(state);
}

SystemState rk4_step(const SystemState& state, double dt, const SystemConfig& cfg) {
    return Engine(cfg).rk4_step(state, dt);
}

SimulationResult simulate(const SystemConfig& cfg, const SimulateOptions& opts) {
    return Engine(cfg).run(opts);
}

}  // namespace pid
