#include "pid/contact.hpp"

#include <cmath>

#include "pid/errors.hpp"

namespace pid {

EffectivePairParams effective_params(double radius_a, double radius_b, double mass_a,
                                     double mass_b, const MaterialParams& mat) {
    if (radius_a <= 0 || radius_b <= 0 || mass_a <= 0 || mass_b <= 0)
        throw ConfigError("effective_params: radii and masses must be positive");
    EffectivePairParams p;
    const double compliance = (1.0 - mat.poissons_ratio * mat.poissons_ratio) / mat.youngs_modulus;
    p.e_eff = 1.0 / (2.0 * compliance);  // both bodies share one material
    p.r_eff = 1.0 / (1.0 / radius_a + 1.0 / radius_b);
    p.m_eff = 1.0 / (1.0 / mass_a + 1.0 / mass_b);
    p.hertz_coeff = (4.0 / 3.0) * p.e_eff * std::sqrt(p.r_eff);
    p.damping_scale = mat.damping_alpha * std::sqrt(p.m_eff * p.hertz_coeff);
    return p;
}

EffectivePairParams effective_wall_params(double radius, double mass, const MaterialParams& mat) {
    return effective_params(radius, radius, mass, mass, mat);
}

double normal_force_magnitude(double penetration, double penetration_rate,
                              const EffectivePairParams& p, const MaterialParams& mat,
                              bool clamp_attractive) {
    (void)mat;
    if (penetration <= 0.0) return 0.0;
    const double sqrt_d = std::sqrt(penetration);
    const double elastic = p.hertz_coeff * penetration * sqrt_d;
    const double gamma = p.damping_scale * std::sqrt(sqrt_d);
    double s = elastic + gamma * penetration_rate;
    if (clamp_attractive && s < 0.0) s = 0.0;
    return s;
}

Vec2 normal_contact_force(const Contact& c, const EffectivePairParams& p,
                          const MaterialParams& mat, bool clamp_attractive) {
    const double s =
        normal_force_magnitude(c.penetration, c.penetration_rate, p, mat, clamp_attractive);
    return -s * c.normal;
}

FrictionResult tangential_friction_force(const Contact& c, const Vec2& normal_force,
                                         double radius, const MaterialParams& mat) {
    FrictionResult r;
    const double n_mag = norm(normal_force);
    const double ft = -mat.friction_mu * n_mag * std::tanh(mat.friction_smoothing * c.slip_rate);
    r.force = ft * c.tangent;
    // n x t = +1 with the perp() tangent convention
    r.torque_i = radius * ft;
    r.torque_j = (c.kind == ContactKind::GranuleGranule) ? radius * ft : 0.0;
    return r;
}

std::pair<double, double> contact_potential_energy(const Contact& c,
                                                   const EffectivePairParams& p) {
    if (c.penetration <= 0.0) return {0.0, 0.0};
    const double d = c.penetration;
    const double total = 0.4 * p.hertz_coeff * d * d * std::sqrt(d);
    if (c.kind == ContactKind::GranuleWall) return {total, 0.0};
    return {0.5 * total, 0.5 * total};
}

double contact_viscous_power(const Contact& c, const EffectivePairParams& p,
                             const MaterialParams& mat, bool clamp_attractive) {
    if (c.penetration <= 0.0) return 0.0;
    const double sqrt_d = std::sqrt(c.penetration);
    const double elastic = p.hertz_coeff * c.penetration * sqrt_d;
    const double applied =
        normal_force_magnitude(c.penetration, c.penetration_rate, p, mat, clamp_attractive);
    return (applied - elastic) * c.penetration_rate;
}

double contact_friction_power(const Contact& c, const Vec2& normal_force,
                              const MaterialParams& mat) {
    const double n_mag = norm(normal_force);
    return mat.friction_mu * n_mag * std::tanh(mat.friction_smoothing * c.slip_rate) *
           c.slip_rate;
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

namespace {

void fill_pair_contact(Contact& c, const SystemState& s, int i, int j, double radius,
                       bool two_d) {
    const Vec2 d = s.granules[j].position - s.granules[i].position;
    const double dist = norm(d);
    c.kind = ContactKind::GranuleGranule;
    c.i = i;
    c.j = j;
    c.penetration = 2.0 * radius - dist;
    c.normal = (dist > 0.0) ? d * (1.0 / dist) : Vec2{1.0, 0.0};
    c.tangent = perp(c.normal);
    const Vec2 rel = s.granules[i].velocity - s.granules[j].velocity;
    c.penetration_rate = dot(rel, c.normal);
    c.slip_rate = two_d ? dot(rel, c.tangent) + radius * (s.granules[i].spin + s.granules[j].spin)
                        : 0.0;
}

void fill_wall_contact(Contact& c, const SystemState& s, int i, WallId wall, double gap,
                       double radius, bool two_d) {
    c.kind = ContactKind::GranuleWall;
    c.i = i;
    c.j = -1;
    c.wall = wall;
    c.penetration = -gap;
    switch (wall) {
        case WallId::Left: c.normal = {-1.0, 0.0}; break;
        case WallId::Right: c.normal = {1.0, 0.0}; break;
        case WallId::Floor: c.normal = {0.0, -1.0}; break;
        case WallId::Ceiling: c.normal = {0.0, 1.0}; break;
    }
    c.tangent = perp(c.normal);
    const Vec2 wall_velocity{s.ps_velocity, 0.0};  // container rides on the oscillator
    const Vec2 rel = s.granules[i].velocity - wall_velocity;
    c.penetration_rate = dot(rel, c.normal);
    c.slip_rate = two_d ? dot(rel, c.tangent) + radius * s.granules[i].spin : 0.0;
}

}  // namespace

void detect_contacts_into(const SystemState& s, const SystemConfig& cfg, ContactSet& out) {
    out.clear();
    const int n = static_cast<int>(s.granules.size());
    const double R = cfg.layout.radius;
    const bool two_d = cfg.layout.mode == LayoutMode::TwoDimensional;
    const double z = s.ps_displacement;

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Vec2 d = s.granules[j].position - s.granules[i].position;
            if (norm(d) < 2.0 * R) {
                out.emplace_back();
                fill_pair_contact(out.back(), s, i, j, R, two_d);
            }
        }
        const double x = s.granules[i].position.x;
        const double left_gap = (x - z) - R;
        if (left_gap < 0.0) {
            out.emplace_back();
            fill_wall_contact(out.back(), s, i, WallId::Left, left_gap, R, two_d);
        }
        const double right_gap = (z + cfg.container.length) - x - R;
        if (right_gap < 0.0) {
            out.emplace_back();
            fill_wall_contact(out.back(), s, i, WallId::Right, right_gap, R, two_d);
        }
        if (two_d) {
            const double y = s.granules[i].position.y;
            const double floor_gap = y - R;
            if (floor_gap < 0.0) {
                out.emplace_back();
                fill_wall_contact(out.back(), s, i, WallId::Floor, floor_gap, R, two_d);
            }
            const double ceiling_gap = cfg.container.height - y - R;
            if (ceiling_gap < 0.0) {
                out.emplace_back();
                fill_wall_contact(out.back(), s, i, WallId::Ceiling, ceiling_gap, R, two_d);
            }
        }
    }
}

ContactSet detect_contacts(const SystemState& state, const SystemConfig& cfg) {
    ContactSet out;
    detect_contacts_into(state, cfg, out);
    return out;
}

}  // namespace pid
