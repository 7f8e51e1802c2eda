#pragma once

#include <sstream>
#include <string>

namespace dana::log {

enum class Level { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Process-wide threshold. Initialized from DANA_LOG (off|error|warn|info|debug),
// default warn. Messages go to stderr so stdout stays composable.
Level threshold();
void set_threshold(Level level);
bool enabled(Level level);
void write(Level level, const std::string& message);

// Replaces any "Bearer <token>" and api_key-looking JSON values with ***.
std::string redact_credentials(std::string text);

namespace detail {
inline void append(std::ostringstream&) {}
template <typename T, typename... Rest>
void append(std::ostringstream& out, const T& first, const Rest&... rest) {
    out << first;
    append(out, rest...);
}
}  // namespace detail

template <typename... Args>
void emit(Level level, const Args&... args) {
    if (!enabled(level)) return;
    std::ostringstream out;
    detail::append(out, args...);
    write(level, out.str());
}

template <typename... Args>
void debug(const Args&... args) {
    emit(Level::debug, args...);
}
template <typename... Args>
void info(const Args&... args) {
    emit(Level::info, args...);
}
template <typename... Args>
void warn(const Args&... args) {
    emit(Level::warn, args...);
}
template <typename... Args>
void error(const Args&... args) {
    emit(Level::error, args...);
}

}  // namespace dana::log
