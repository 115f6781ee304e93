#include "hsc/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace hsc {

namespace {

LogLevel parse_level(const char* s) {
    if (s == nullptr) return LogLevel::warn;
    const std::string v(s);
    if (v == "error" || v == "0") return LogLevel::error;
    if (v == "warn" || v == "1") return LogLevel::warn;
    if (v == "info" || v == "2") return LogLevel::info;
    if (v == "debug" || v == "3") return LogLevel::debug;
    return LogLevel::warn;
}

const char* label(LogLevel l) {
    switch (l) {
        case LogLevel::error:
            return "error";
        case LogLevel::warn:
            return "warn";
        case LogLevel::info:
            return "info";
        case LogLevel::debug:
            return "debug";
    }
    return "?";
}

}  // namespace

LogLevel log_threshold() {
    static const LogLevel level = parse_level(std::getenv("HS_CTRL_LOG"));
    return level;
}

void log_message(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[hsctrl " << label(level) << "] " << msg << '\n';
}

}  // namespace hsc
