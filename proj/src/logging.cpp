#include "dana/logging.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <regex>

#include "dana/text.hpp"

namespace dana::log {

namespace {

Level parse_level(const char* value) {
    if (value == nullptr) return Level::warn;
    std::string v = text::to_lower(value);
    if (v == "off") return Level::off;
    if (v == "error") return Level::error;
    if (v == "warn" || v == "warning") return Level::warn;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<Level>& threshold_storage() {
    static std::atomic<Level> level{parse_level(std::getenv("DANA_LOG"))};
    return level;
}

const char* level_tag(Level level) {
    switch (level) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
        default: return "?";
    }
}

std::mutex& write_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Level threshold() { return threshold_storage().load(std::memory_order_relaxed); }

void set_threshold(Level level) { threshold_storage().store(level, std::memory_order_relaxed); }

bool enabled(Level level) {
    return level != Level::off && static_cast<int>(level) <= static_cast<int>(threshold());
}

void write(Level level, const std::string& message) {
    std::lock_guard<std::mutex> lock(write_mutex());
    std::cerr << "[dana:" << level_tag(level) << "] " << message << "\n";
}

std::string redact_credentials(std::string text) {
    static const std::regex bearer(R"(Bearer\s+[^\s"']+)");
    static const std::regex key_field(R"((\"api_key\"\s*:\s*\")[^\"]*(\"))");
    text = std::regex_replace(text, bearer, "Bearer ***");
    text = std::regex_replace(text, key_field, "$1***$2");
    return text;
}

}  // namespace dana::log
