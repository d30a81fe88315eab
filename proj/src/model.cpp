#include "pid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pid/errors.hpp"

namespace pid {

using nlohmann::json;

std::pair<double, double> sphere_inertials(double density, double radius) {
    if (density <= 0.0) throw ConfigError("sphere_inertials: density must be positive");
    if (radius < 0.0) throw ConfigError("sphere_inertials: radius must be nonnegative");
    const double mass = (4.0 / 3.0) * std::numbers::pi * radius * radius * radius * density;
    const double inertia = 0.4 * mass * radius * radius;
    return {mass, inertia};
}

double shock_force(double t, const ShockPulse& pulse) {
    if (t >= pulse.duration) return 0.0;
    return pulse.amplitude * std::sin(std::numbers::pi / pulse.duration * t);
}

// ---------------------------------------------------------------------------
// Preset catalog
// ---------------------------------------------------------------------------

namespace {

// Steel granules; the damping constant and friction parameters go with the
// viscoelastic Hertz / tanh-friction contact laws.
MaterialParams steel_material() {
    MaterialParams m;
    m.youngs_modulus = 200e9;
    m.poissons_ratio = 0.3;
    m.density = 7850.0;
    m.damping_alpha = 6.313e-3;
    m.friction_mu = 0.099;
    m.friction_smoothing = 250.0;
    return m;
}

PrimaryStructureParams default_ps() {
    PrimaryStructureParams p;
    p.total_mass = 20.0;
    p.stiffness = 8e4;
    p.damping = 25.30;
    return p;
}

ShockPulse default_shock() { return ShockPulse{5e3, 1e-3}; }

struct PresetBuilder {
    SystemConfig cfg;

    PresetBuilder() {
        cfg.material = steel_material();
        cfg.ps = default_ps();
        cfg.shock = default_shock();
        cfg.integrator = IntegratorSettings{};
    }

    void no_granules() {
        cfg.layout = GranuleLayout{};
        cfg.layout.mode = LayoutMode::OneDimensional;
        cfg.container = ContainerGeometry{0.1, 0.1, 0.0, 0.0};
    }

    /// 1D row of granules; gaps = wall|g0|granule|g1|granule|...|gn|wall.
    void row_1d(double radius, double mass, double d0, const std::vector<double>& gaps) {
        const int n = static_cast<int>(gaps.size()) - 1;
        cfg.layout.radius = radius;
        cfg.layout.mass = mass;
        cfg.layout.count = n;
        cfg.layout.mode = LayoutMode::OneDimensional;
        cfg.layout.initial_centers.clear();
        double x = 0.0;
        for (int k = 0; k < n; ++k) {
            x += gaps[k] + radius;
            cfg.layout.initial_centers.push_back({x, 0.0});
            x += radius;
        }
        const double d1 = x + gaps[n];
        cfg.container = ContainerGeometry{d1, 2.0 * radius, d0, 0.0};
    }

    /// Close-packed 2D stack: bottom row pinned to the side walls with equal
    /// in-row gaps, upper rows resting on the row below at the x midpoints.
    void stack_2d(double radius, double mass, double d0, double dv, double d1, double d2,
                  const std::vector<int>& rows) {
        cfg.layout.radius = radius;
        cfg.layout.mass = mass;
        cfg.layout.mode = LayoutMode::TwoDimensional;
        cfg.layout.initial_centers.clear();
        cfg.container = ContainerGeometry{d1, d2, d0, dv};

        std::vector<double> base_x;  // bottom-row centers
        const int nb = rows.front();
        if (nb == 1) {
            base_x.push_back(d1 / 2.0);
        } else {
            const double spacing = (d1 - 2.0 * radius) / (nb - 1);
            for (int k = 0; k < nb; ++k) base_x.push_back(radius + k * spacing);
        }
        const double half_dx = (base_x.size() > 1 ? (base_x[1] - base_x[0]) / 2.0 : 0.0);
        const double row_dy = std::sqrt(4.0 * radius * radius - half_dx * half_dx);

        double y = radius;
        std::vector<double> xs = base_x;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r > 0) {
                y += row_dy;
                std::vector<double> next;
                if (rows[r] == static_cast<int>(xs.size()) - 1) {
                    for (size_t k = 0; k + 1 < xs.size(); ++k)
                        next.push_back((xs[k] + xs[k + 1]) / 2.0);
                } else {
                    next = base_x;  // 3-2-3 style stack returns to the base positions
                }
                xs = next;
            }
            for (double x : xs) cfg.layout.initial_centers.push_back({x, y});
        }
        cfg.layout.count = static_cast<int>(cfg.layout.initial_centers.size());
    }
};

json preset_document(const std::string& id) {
    PresetBuilder b;

    if (id == "ps_only") {
        b.no_granules();
    } else if (id == "single_g_config1" || id == "single_g_config2" || id == "single_g_config3") {
        const double R = 33.2e-3, m = 1.2, d0 = 0.4e-3;
        // total slack 2*d0: centered / at the right wall / at the left wall
        if (id == "single_g_config1") b.row_1d(R, m, d0, {d0, d0});
        if (id == "single_g_config2") b.row_1d(R, m, d0, {2.0 * d0, 0.0});
        if (id == "single_g_config3") b.row_1d(R, m, d0, {0.0, 2.0 * d0});
    } else if (id.rfind("two_g_config", 0) == 0 && id.size() == 13) {
        const double R = 26.3e-3, m = 0.6, d0 = 6.0e-3;
        const char c = id.back();
        // total slack d0 split over the three gaps; configs 1 and 4 symmetric
        switch (c) {
            case '1': b.row_1d(R, m, d0, {0.0, d0, 0.0}); break;
            case '2': b.row_1d(R, m, d0, {0.0, 0.0, d0}); break;
            case '3': b.row_1d(R, m, d0, {d0, 0.0, 0.0}); break;
            case '4': b.row_1d(R, m, d0, {d0 / 2, 0.0, d0 / 2}); break;
            case '5': b.row_1d(R, m, d0, {0.0, d0 / 2, d0 / 2}); break;
            case '6': b.row_1d(R, m, d0, {d0 / 2, d0 / 2, 0.0}); break;
            default: throw ConfigError("unknown preset: " + id);
        }
    } else if (id == "three_g_optimal") {
        b.stack_2d(23.0e-3, 0.4, 7.0e-3, 11.4e-3, 99.0e-3, 95.0e-3, {2, 1});
    } else if (id == "five_g_optimal") {
        b.stack_2d(19.4e-3, 0.24, 7.0e-3, 29.9e-3, 130.4e-3, 100.0e-3, {3, 2});
    } else if (id == "eight_g_optimal") {
        b.stack_2d(16.6e-3, 0.15, 5.0e-3, 22.6e-3, 109.5e-3, 110.0e-3, {3, 2, 3});
    } else {
        throw ConfigError("unknown preset: " + id);
    }

    return config_to_json(b.cfg);
}

}  // namespace

std::vector<std::string> preset_catalog() {
    return {"ps_only",          "single_g_config1", "single_g_config2", "single_g_config3",
            "two_g_config1",    "two_g_config2",    "two_g_config3",    "two_g_config4",
            "two_g_config5",    "two_g_config6",    "three_g_optimal",  "five_g_optimal",
            "eight_g_optimal"};
}

SystemConfig build_preset(const std::string& preset_id, const json& overrides) {
    json doc = preset_document(preset_id);
    if (!overrides.is_null() && !overrides.empty()) doc.merge_patch(overrides);
    SystemConfig cfg = config_from_json(doc);
    const auto violations = validate_config(cfg);
    if (has_errors(violations)) {
        std::ostringstream os;
        os << "preset '" << preset_id << "' with overrides is invalid:";
        for (const auto& v : violations)
            if (v.severity == Violation::Severity::Error) os << "\n  " << v.field << ": " << v.message;
        throw ConfigError(os.str());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Violation::Severity::Error; });
}

namespace {

void require(std::vector<Violation>& out, bool ok, const std::string& field,
             const std::string& msg) {
    if (!ok) out.push_back({Violation::Severity::Error, field, msg});
}

}  // namespace

std::vector<Violation> validate_config(const SystemConfig& cfg) {
    std::vector<Violation> out;
    const auto& m = cfg.material;
    require(out, m.youngs_modulus > 0, "material.youngs_modulus", "must be > 0");
    require(out, m.poissons_ratio >= 0 && m.poissons_ratio < 0.5, "material.poissons_ratio",
            "must be in [0, 0.5)");
    require(out, m.density > 0, "material.density", "must be > 0");
    require(out, m.damping_alpha >= 0, "material.damping_alpha", "must be >= 0");
    require(out, m.friction_mu >= 0, "material.friction_mu", "must be >= 0");
    require(out, m.friction_smoothing > 0, "material.friction_smoothing", "must be > 0");

    require(out, cfg.ps.total_mass > 0, "ps.total_mass", "must be > 0");
    require(out, cfg.ps.stiffness > 0, "ps.stiffness", "must be > 0");
    require(out, cfg.ps.damping > 0, "ps.damping", "must be > 0");
    require(out, cfg.ps_mass() > 0, "ps.total_mass",
            "granule mass exceeds the total mass; oscillator mass would be <= 0");

    const auto& g = cfg.container;
    require(out, g.length > 0, "container.length", "must be > 0");
    require(out, g.height > 0, "container.height", "must be > 0");
    require(out, g.neighbor_clearance >= 0, "container.neighbor_clearance", "must be >= 0");
    require(out, g.ceiling_gap >= 0, "container.ceiling_gap", "must be >= 0");

    const auto& l = cfg.layout;
    require(out, l.count >= 0, "layout.count", "must be >= 0");
    require(out, l.count == static_cast<int>(l.initial_centers.size()), "layout.initial_centers",
            "count does not match the number of initial centers");
    if (l.count > 0) {
        require(out, l.radius > 0, "layout.radius", "must be > 0 with granules present");
        require(out, l.mass > 0, "layout.mass", "must be > 0 with granules present");
    }

    // geometric placement: zero initial penetration, tiny slack for touching layouts
    const double tol = 1e-12;
    const double R = l.radius;
    for (size_t i = 0; i < l.initial_centers.size(); ++i) {
        const Vec2 c = l.initial_centers[i];
        const std::string f = "layout.initial_centers[" + std::to_string(i) + "]";
        require(out, c.x - R >= -tol && c.x + R <= g.length + tol, f,
                "granule does not fit inside the container along x");
        if (l.mode == LayoutMode::TwoDimensional) {
            require(out, c.y - R >= -tol && c.y + R <= g.height + tol, f,
                    "granule does not fit inside the container along y");
        }
        for (size_t j = i + 1; j < l.initial_centers.size(); ++j) {
            const double dist = norm(l.initial_centers[j] - c);
            require(out, dist >= 2.0 * R - tol,
                    f + "/" + std::to_string(j), "granules initially overlap");
        }
    }
    if (l.mode == LayoutMode::OneDimensional) {
        for (size_t i = 0; i < l.initial_centers.size(); ++i)
            require(out, l.initial_centers[i].y == l.initial_centers.front().y,
                    "layout.initial_centers", "1D layout requires a single shared y value");
    }

    require(out, cfg.shock.amplitude >= 0, "shock.amplitude", "must be >= 0");
    require(out, cfg.shock.duration > 0, "shock.duration", "must be > 0");

    const auto& it = cfg.integrator;
    require(out, it.dt_contact > 0 && it.dt_contact <= it.dt_free, "integrator.dt_contact",
            "need 0 < dt_contact <= dt_free");
    require(out, it.proximity_gap > 0, "integrator.proximity_gap", "must be > 0");
    require(out, it.ramp_steps >= 1, "integrator.ramp_steps", "must be >= 1");
    require(out, it.t_max > cfg.shock.duration, "integrator.t_max",
            "must exceed the shock duration");
    require(out, it.energy_floor > 0, "integrator.energy_floor", "must be > 0");
    require(out, it.conservation_tol > 0, "integrator.conservation_tol", "must be > 0");
    require(out, it.output_stride > 0, "integrator.output_stride", "must be > 0");

    if (l.count > 0 && l.radius > 0 && l.mass > 0 && m.density > 0) {
        const double m_sphere = sphere_inertials(m.density, l.radius).first;
        const double rel = std::abs(m_sphere - l.mass) / l.mass;
        if (rel > 0.01) {
            std::ostringstream os;
            os << "configured granule mass " << l.mass << " kg deviates "
               << rel * 100.0 << "% from the density-derived sphere mass " << m_sphere << " kg";
            out.push_back({Violation::Severity::Warning, "layout.mass", os.str()});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON round trip (snake_case fields, SI units)
// ---------------------------------------------------------------------------

namespace {

json centers_to_json(const std::vector<Vec2>& centers) {
    json arr = json::array();
    for (const auto& c : centers) arr.push_back(json::array({c.x, c.y}));
    return arr;
}

std::vector<Vec2> centers_from_json(const json& arr) {
    std::vector<Vec2> out;
    for (const auto& e : arr) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    return out;
}

}  // namespace

void to_json(json& j, const SystemConfig& cfg) {
    j = json{
        {"material",
         {{"youngs_modulus", cfg.material.youngs_modulus},
          {"poissons_ratio", cfg.material.poissons_ratio},
          {"density", cfg.material.density},
          {"damping_alpha", cfg.material.damping_alpha},
          {"friction_mu", cfg.material.friction_mu},
          {"friction_smoothing", cfg.material.friction_smoothing}}},
        {"ps",
         {{"total_mass", cfg.ps.total_mass},
          {"stiffness", cfg.ps.stiffness},
          {"damping", cfg.ps.damping}}},
        {"container",
         {{"length", cfg.container.length},
          {"height", cfg.container.height},
          {"neighbor_clearance", cfg.container.neighbor_clearance},
          {"ceiling_gap", cfg.container.ceiling_gap}}},
        {"layout",
         {{"radius", cfg.layout.radius},
          {"mass", cfg.layout.mass},
          {"count", cfg.layout.count},
          {"mode",
           cfg.layout.mode == LayoutMode::OneDimensional ? "one_dimensional" : "two_dimensional"},
          {"initial_centers", centers_to_json(cfg.layout.initial_centers)}}},
        {"shock", {{"amplitude", cfg.shock.amplitude}, {"duration", cfg.shock.duration}}},
        {"integrator",
         {{"dt_free", cfg.integrator.dt_free},
          {"dt_contact", cfg.integrator.dt_contact},
          {"proximity_gap", cfg.integrator.proximity_gap},
          {"ramp_steps", cfg.integrator.ramp_steps},
          {"t_max", cfg.integrator.t_max},
          {"energy_floor", cfg.integrator.energy_floor},
          {"conservation_tol", cfg.integrator.conservation_tol},
          {"output_stride", cfg.integrator.output_stride},
          {"clamp_attractive_normal", cfg.integrator.clamp_attractive_normal}}}};
}

void from_json(const json& j, SystemConfig& cfg) {
    const auto& m = j.at("material");
    m.at("youngs_modulus").get_to(cfg.material.youngs_modulus);
    m.at("poissons_ratio").get_to(cfg.material.poissons_ratio);
    m.at("density").get_to(cfg.material.density);
    m.at("damping_alpha").get_to(cfg.material.damping_alpha);
    m.at("friction_mu").get_to(cfg.material.friction_mu);
    m.at("friction_smoothing").get_to(cfg.material.friction_smoothing);

    const auto& p = j.at("ps");
    p.at("total_mass").get_to(cfg.ps.total_mass);
    p.at("stiffness").get_to(cfg.ps.stiffness);
    p.at("damping").get_to(cfg.ps.damping);

    const auto& c = j.at("container");
    c.at("length").get_to(cfg.container.length);
    c.at("height").get_to(cfg.container.height);
    c.at("neighbor_clearance").get_to(cfg.container.neighbor_clearance);
    c.at("ceiling_gap").get_to(cfg.container.ceiling_gap);

    const auto& l = j.at("layout");
    l.at("radius").get_to(cfg.layout.radius);
    l.at("mass").get_to(cfg.layout.mass);
    l.at("count").get_to(cfg.layout.count);
    const std::string mode = l.at("mode").get<std::string>();
    if (mode == "one_dimensional") {
        cfg.layout.mode = LayoutMode::OneDimensional;
    } else if (mode == "two_dimensional") {
        cfg.layout.mode = LayoutMode::TwoDimensional;
    } else {
        throw ConfigError("layout.mode must be one_dimensional or two_dimensional");
    }
    cfg.layout.initial_centers = centers_from_json(l.at("initial_centers"));

    const auto& s = j.at("shock");
    s.at("amplitude").get_to(cfg.shock.amplitude);
    s.at("duration").get_to(cfg.shock.duration);

    const auto& it = j.at("integrator");
    it.at("dt_free").get_to(cfg.integrator.dt_free);
    it.at("dt_contact").get_to(cfg.integrator.dt_contact);
    it.at("proximity_gap").get_to(cfg.integrator.proximity_gap);
    it.at("ramp_steps").get_to(cfg.integrator.ramp_steps);
    it.at("t_max").get_to(cfg.integrator.t_max);
    it.at("energy_floor").get_to(cfg.integrator.energy_floor);
    it.at("conservation_tol").get_to(cfg.integrator.conservation_tol);
    cfg.integrator.output_stride = it.value("output_stride", 2e-5);
    cfg.integrator.clamp_attractive_normal = it.value("clamp_attractive_normal", false);
}

SystemConfig config_from_json(const json& j) { return j.get<SystemConfig>(); }

json config_to_json(const SystemConfig& cfg) {
    json j = cfg;
    return j;
}

}  // namespace pid
