#pragma once

#include <string>

namespace hsc {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold from HS_CTRL_LOG (error|warn|info|debug or 0..3); warn by default.
LogLevel log_threshold();

/// Writes to stderr when `level` is at or below the threshold.
void log_message(LogLevel level, const std::string& msg);

}  // namespace hsc
