#pragma once

#include <vector>

#include "pid/vec2.hpp"

namespace pid {

struct GranuleState {
    Vec2 position;  // m, inertial frame (coincides with the container frame at t=0)
    Vec2 velocity;  // m/s
    double angle = 0.0;  // rad
    double spin = 0.0;   // rad/s
};

/// Instantaneous state of the oscillator and all granules. In 1D mode the y
/// components, angles and spins stay identically zero.
struct SystemState {
    double time = 0.0;
    double ps_displacement = 0.0;  // m, z
    double ps_velocity = 0.0;      // m/s
    std::vector<GranuleState> granules;
};

}  // namespace pid
