#pragma once

#include <stdexcept>
#include <string>

namespace pid {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Aborted simulation: energy-conservation violation or non-finite state (CLI exit code 3).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Analysis precondition failure (insufficient decay, bad spectral range, ...).
class AnalysisError : public std::runtime_error {
public:
    explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pid
