#pragma once

#include <cstdarg>

namespace pid::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold parsed once from PID_LOG_LEVEL (error|warn|info|debug); default warn.
Level level();

void write(Level lvl, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

#define PID_LOG_ERROR(...) ::pid::log::write(::pid::log::Level::Error, __VA_ARGS__)
#define PID_LOG_WARN(...) ::pid::log::write(::pid::log::Level::Warn, __VA_ARGS__)
#define PID_LOG_INFO(...) ::pid::log::write(::pid::log::Level::Info, __VA_ARGS__)
#define PID_LOG_DEBUG(...) ::pid::log::write(::pid::log::Level::Debug, __VA_ARGS__)

}  // namespace pid::log
