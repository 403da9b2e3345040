#pragma once

// Minimal stderr logging. Verbosity comes from DRAGONBOAT_LOG_LEVEL
// (error, warn, info, debug; default warn). Messages use "{}" placeholders.

#include <iostream>
#include <mutex>
#include <sstream>
#include <string_view>

namespace dragonboat::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level threshold();
void set_threshold(Level l);
std::mutex& sink_mutex();

namespace detail {

inline void format_into(std::ostringstream& os, std::string_view fmt) { os << fmt; }

template <typename T, typename... Rest>
void format_into(std::ostringstream& os, std::string_view fmt, const T& first, const Rest&... rest) {
    const auto pos = fmt.find("{}");
    if (pos == std::string_view::npos) {
        os << fmt;
        return;
    }
    os << fmt.substr(0, pos) << first;
    format_into(os, fmt.substr(pos + 2), rest...);
}

template <typename... Args>
void emit(Level l, const char* tag, std::string_view fmt, const Args&... args) {
    if (static_cast<int>(l) > static_cast<int>(threshold())) return;
    std::ostringstream os;
    format_into(os, fmt, args...);
    std::lock_guard lock(sink_mutex());
    std::cerr << "[" << tag << "] " << os.str() << '\n';
}

}  // namespace detail

template <typename... Args>
void error(std::string_view fmt, const Args&... args) { detail::emit(Level::error, "error", fmt, args...); }
template <typename... Args>
void warn(std::string_view fmt, const Args&... args) { detail::emit(Level::warn, "warn", fmt, args...); }
template <typename... Args>
void info(std::string_view fmt, const Args&... args) { detail::emit(Level::info, "info", fmt, args...); }
template <typename... Args>
void debug(std::string_view fmt, const Args&... args) { detail::emit(Level::debug, "debug", fmt, args...); }

}  // namespace dragonboat::log
