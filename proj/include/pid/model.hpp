#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pid/vec2.hpp"

namespace pid {

enum class LayoutMode { OneDimensional, TwoDimensional };

/// Granule material; all granules (and the container walls, treated as an
/// identical mirror granule on contact) share one material.
struct MaterialParams {
    double youngs_modulus = 0.0;    // Pa
    double poissons_ratio = 0.0;    // [-]
    double density = 0.0;           // kg/m^3
    double damping_alpha = 0.0;     // [-], viscoelastic constant of the normal damping law
    double friction_mu = 0.0;       // [-], slipping friction coefficient
    double friction_smoothing = 0;  // s/m, tanh regularization slope near zero slip
};

struct PrimaryStructureParams {
    double total_mass = 0.0;  // kg, full system mass incl. granules
    double stiffness = 0.0;   // N/m
    double damping = 0.0;     // N*s/m
};

/// Rectangular container interior, in container-fixed coordinates with the
/// origin at the inner bottom-left corner. The container rides rigidly on the
/// primary structure along x.
struct ContainerGeometry {
    double length = 0.0;              // m, x extent
    double height = 0.0;              // m, y extent (unused in 1D mode)
    double neighbor_clearance = 0.0;  // m, nominal gap between in-row neighbors
    double ceiling_gap = 0.0;         // m, nominal gap above the top granule
};

struct GranuleLayout {
    double radius = 0.0;  // m
    double mass = 0.0;    // kg, per granule (nominal; density consistency is checked)
    int count = 0;
    LayoutMode mode = LayoutMode::OneDimensional;
    std::vector<Vec2> initial_centers;  // container-fixed, m
};

struct ShockPulse {
    double amplitude = 0.0;  // N
    double duration = 0.0;   // s
};

struct IntegratorSettings {
    double dt_free = 2e-5;        // s, free-flight step
    double dt_contact = 3e-8;     // s, collision step
    double proximity_gap = 5e-5;  // m, static slow-down zone for fast approaches
    int ramp_steps = 8;           // geometric sub-steps per step-size transition
    double t_max = 60.0;          // s
    double energy_floor = 1e-5;   // terminate once E_sys/E_in falls below
    double conservation_tol = 1e-3;
    double output_stride = 2e-5;  // s, uniform sampling interval of the outputs
    bool clamp_attractive_normal = false;
};

struct SystemConfig {
    MaterialParams material;
    PrimaryStructureParams ps;
    ContainerGeometry container;
    GranuleLayout layout;
    ShockPulse shock;
    IntegratorSettings integrator;

    double granule_mass_total() const { return layout.mass * layout.count; }
    /// Oscillator mass with the granule mass removed, keeping total_mass fixed.
    double ps_mass() const { return ps.total_mass - granule_mass_total(); }
};

struct Violation {
    enum class Severity { Warning, Error };
    Severity severity = Severity::Error;
    std::string field;
    std::string message;
};

/// Preset identifiers accepted by build_preset.
std::vector<std::string> preset_catalog();

/// Fully populated, validated configuration for a catalog entry. `overrides`
/// is a JSON merge patch applied on top of the preset document.
SystemConfig build_preset(const std::string& preset_id,
                          const nlohmann::json& overrides = nlohmann::json::object());

/// All invariant violations; empty means the config is usable. Warnings
/// (density/mass mismatch) do not block a run.
std::vector<Violation> validate_config(const SystemConfig& cfg);

bool has_errors(const std::vector<Violation>& violations);

/// (mass, moment of inertia) of a solid sphere.
std::pair<double, double> sphere_inertials(double density, double radius);

/// Half-sine shock pulse; identically zero after the pulse duration.
double shock_force(double t, const ShockPulse& pulse);

void to_json(nlohmann::json& j, const SystemConfig& cfg);
void from_json(const nlohmann::json& j, SystemConfig& cfg);
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& cfg);

}  // namespace pid
