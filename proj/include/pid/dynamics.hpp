#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pid/contact.hpp"
#include "pid/energy.hpp"
#include "pid/model.hpp"
#include "pid/state.hpp"

namespace pid {

struct GranuleDerivative {
    Vec2 velocity;
    Vec2 acceleration;
    double spin = 0.0;
    double spin_accel = 0.0;
};

/// Instantaneous dissipation/input rates, accumulated with the same stage
/// weights as the state so the ledger stays consistent with the dynamics.
struct StagePower {
    double ps_damping = 0.0;
    double viscous = 0.0;
    double friction = 0.0;
    double shock_input = 0.0;
};

struct StateDerivative {
    double ps_velocity = 0.0;
    double ps_acceleration = 0.0;
    std::vector<GranuleDerivative> granules;
    double f_d = 0.0;  // N, net x contact reaction on the walls
    StagePower power;
};

enum class StepMode { FreeFlight, Contact };

struct CollisionEvent {
    double time = 0.0;
    bool onset = true;  // false marks separation
    ContactKind kind = ContactKind::GranuleGranule;
    int i = 0;
    int j = -1;
    WallId wall = WallId::Left;
};

/// Sampled run output at the fixed stride, with the collision-event and
/// step-mode logs.
struct Trajectory {
    double sample_interval = 0.0;
    std::vector<double> times;
    std::vector<double> ps_displacement;
    std::vector<double> ps_velocity;
    std::vector<std::vector<GranuleState>> granule_samples;  // empty unless recorded
    std::vector<CollisionEvent> events;
    std::vector<std::pair<double, StepMode>> mode_log;

    long collision_count() const;
    UniformSeries ps_velocity_series() const;
};

struct SimulateOptions {
    bool record_granules = true;  // per-sample granule states and energy shares
};

struct SimulationResult {
    Trajectory trajectory;
    EnergyLedger ledger;
};

/// Precomputed coefficients plus scratch buffers for one configuration. A
/// run is strictly sequential; distinct Engine instances are independent.
class Engine {
public:
    explicit Engine(const SystemConfig& cfg);

    const SystemConfig& config() const { return cfg_; }
    const EffectivePairParams& pair_params() const { return pair_; }
    const EffectivePairParams& wall_params() const { return wall_; }

    /// Coupled accelerations of the oscillator and granules plus the force
    /// diagnostics; granules in free flight have zero acceleration.
    StateDerivative derivatives(const SystemState& state) const;

    /// One classical Runge-Kutta update. Throws SimulationError on a
    /// non-finite result.
    SystemState rk4_step(const SystemState& state, double dt) const;

    /// One macro step under the two-level stepping scheme with a geometric
    /// ramp between the free-flight and contact step sizes.
    std::pair<SystemState, StepMode> advance(const SystemState& state);
    double current_dt() const { return current_dt_; }

    SystemState initial_state() const;
    SimulationResult run(const SimulateOptions& opts = {});

private:
    struct Survey {
        bool contact_active = false;   // penetration beyond the event threshold
        bool slow_down = false;        // imminent closure somewhere
        std::uint64_t pair_mask = 0;   // active granule-granule pairs (n <= 8 fast path)
        std::uint64_t wall_mask = 0;   // active granule-wall pairs
        std::vector<std::uint32_t> keys;  // active pairs, sorted (n > 8 fallback)
    };

    void eval(const SystemState& state, StateDerivative& out) const;
    void stage_state(const SystemState& base, const StateDerivative& k, double h,
                     SystemState& out) const;
    Survey survey(const SystemState& state) const;
    EnergySample measure(const SystemState& state, double w_ps, double w_vis, double w_f,
                         double e_in, bool per_granule) const;

    SystemConfig cfg_;
    EffectivePairParams pair_;
    EffectivePairParams wall_;
    double m_ps_ = 0.0;
    double inv_m_ps_ = 0.0;
    double inv_m_g_ = 0.0;
    double inv_i_g_ = 0.0;
    bool two_d_ = false;
    double ramp_ratio_ = 1.0;  // per-sub-step geometric factor between dt levels
    double current_dt_ = 0.0;

    // scratch (single-run use; Engine is not shareable across threads)
    mutable ContactSet contacts_;
    mutable StateDerivative k1_, k2_, k3_, k4_;
    mutable SystemState s2_, s3_, s4_;
};

StateDerivative derivatives(const SystemState& state, const SystemConfig& cfg);
SystemState rk4_step(const SystemState& state, double dt, const SystemConfig& cfg);
SimulationResult simulate(const SystemConfig& cfg, const SimulateOptions& opts = {});

}  // namespace pid
