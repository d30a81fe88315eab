#pragma once

#include <utility>
#include <vector>

#include "pid/model.hpp"
#include "pid/state.hpp"
#include "pid/vec2.hpp"

namespace pid {

enum class WallId : int { Left = 0, Right = 1, Floor = 2, Ceiling = 3 };
enum class ContactKind { GranuleGranule, GranuleWall };

/// Combined two-body parameters of a contacting pair. A wall partner is
/// treated as an identical mirror granule, so wall contacts reuse the
/// same-law coefficients with r_eff = R/2 and m_eff = m/2.
struct EffectivePairParams {
    double e_eff = 0.0;        // Pa
    double r_eff = 0.0;        // m
    double m_eff = 0.0;        // kg
    double hertz_coeff = 0.0;  // N/m^{3/2}, A = (4/3) E_eff sqrt(R_eff)
    double damping_scale = 0;  // gamma = damping_scale * delta^{1/4}
};

struct Contact {
    ContactKind kind = ContactKind::GranuleGranule;
    int i = 0;                     // granule index
    int j = -1;                    // partner granule when kind == GranuleGranule
    WallId wall = WallId::Left;    // partner wall when kind == GranuleWall
    double penetration = 0.0;      // m, >= 0
    double penetration_rate = 0;   // m/s, positive while closing
    Vec2 normal;                   // unit, from granule i toward the partner
    Vec2 tangent;                  // unit, perp(normal)
    double slip_rate = 0.0;        // m/s, tangential surface slip incl. spins
};

using ContactSet = std::vector<Contact>;

struct FrictionResult {
    Vec2 force;            // on granule i
    double torque_i = 0.0;  // N*m, z component
    double torque_j = 0.0;  // on the partner granule (zero for walls)
};

EffectivePairParams effective_params(double radius_a, double radius_b, double mass_a,
                                     double mass_b, const MaterialParams& mat);
/// Granule-wall combination: identical to a pair of two such granules.
EffectivePairParams effective_wall_params(double radius, double mass, const MaterialParams& mat);

/// Signed magnitude of the viscoelastic Hertzian normal force,
/// A d^{3/2} + gamma(d) d_rate. Negative values (end-of-contact suction from
/// the damping term) are kept unless clamping is requested.
double normal_force_magnitude(double penetration, double penetration_rate,
                              const EffectivePairParams& p, const MaterialParams& mat,
                              bool clamp_attractive);

/// Normal force vector acting on granule i (repulsive while the elastic term
/// dominates); exactly zero at zero penetration.
Vec2 normal_contact_force(const Contact& c, const EffectivePairParams& p,
                          const MaterialParams& mat, bool clamp_attractive = false);

/// Regularized Coulomb friction, |f| = mu |N| tanh(ks * slip), opposing slip,
/// with the contact torques on both bodies. 2D mode only.
FrictionResult tangential_friction_force(const Contact& c, const Vec2& normal_force,
                                         double radius, const MaterialParams& mat);

/// Elastic contact energy split (share_i, share_j); wall contacts assign the
/// whole (2/5) A d^{5/2} to the granule.
std::pair<double, double> contact_potential_energy(const Contact& c,
                                                   const EffectivePairParams& p);

/// Dissipation rate of the damping part of the applied normal force; with
/// clamping this accounts for the suppressed force so the energy ledger
/// stays consistent.
double contact_viscous_power(const Contact& c, const EffectivePairParams& p,
                             const MaterialParams& mat, bool clamp_attractive);

double contact_friction_power(const Contact& c, const Vec2& normal_force,
                              const MaterialParams& mat);

/// All active granule-granule and granule-wall contacts. The container walls
/// ride on the oscillator: wall x positions are offset by the instantaneous
/// displacement and the wall velocity enters the contact rates.
ContactSet detect_contacts(const SystemState& state, const SystemConfig& cfg);

void detect_contacts_into(const SystemState& state, const SystemConfig& cfg, ContactSet& out);

}  // namespace pid
