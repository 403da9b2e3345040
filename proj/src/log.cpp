#include "dragonboat/log.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dragonboat::log {

namespace {

Level from_env() {
    const char* env = std::getenv("DRAGONBOAT_LOG_LEVEL");
    if (!env) return Level::warn;
    const std::string v(env);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<int>& level_storage() {
    static std::atomic<int> level{static_cast<int>(from_env())};
    return level;
}

}  // namespace

Level threshold() { return static_cast<Level>(level_storage().load(std::memory_order_relaxed)); }

void set_threshold(Level l) { level_storage().store(static_cast<int>(l), std::memory_order_relaxed); }

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace dragonboat::log
