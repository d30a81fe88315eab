#include "pid/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace pid::log {

static Level parse_env() {
    const char* v = std::getenv("PID_LOG_LEVEL");
    if (v == nullptr) return Level::Warn;
    if (std::strcmp(v, "error") == 0) return Level::Error;
    if (std::strcmp(v, "warn") == 0) return Level::Warn;
    if (std::strcmp(v, "info") == 0) return Level::Info;
    if (std::strcmp(v, "debug") == 0) return Level::Debug;
    return Level::Warn;
}

Level level() {
    static const Level lvl = parse_env();
    return lvl;
}

void write(Level lvl, const char* fmt, ...) {
    if (static_cast<int>(lvl) > static_cast<int>(level())) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[pid %s] ", names[static_cast<int>(lvl)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace pid::log
