#pragma once

#include <functional>
#include <string_view>

namespace sgaudit {

/// Writes "warning: <message>" to stderr unless a sink is installed.
void log_warning(std::string_view message);

using LogSink = std::function<void(std::string_view)>;
/// Replaces the warning sink; pass an empty function to restore stderr.
/// Returns the previous sink.
LogSink set_warning_sink(LogSink sink);

}  // namespace sgaudit
