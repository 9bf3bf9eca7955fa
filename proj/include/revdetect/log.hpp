#pragma once

#include <functional>
#include <string_view>

namespace revdetect::log {

enum class Level { Info, Warning };

using Sink = std::function<void(Level, std::string_view)>;

/// Replaces the process-wide sink (default: stderr). Returns the previous one.
Sink set_sink(Sink sink);

void info(std::string_view msg);
void warn(std::string_view msg);

}  // namespace revdetect::log
