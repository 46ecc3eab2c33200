#include "sgaudit/common/log.hpp"

#include <iostream>
#include <mutex>

namespace sgaudit {

namespace {
std::mutex g_mutex;
LogSink g_sink;
}  // namespace

void log_warning(std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (g_sink)
        g_sink(message);
    else
        std::cerr << "warning: " << message << '\n';
}

LogSink set_warning_sink(LogSink sink) {
    std::lock_guard lock(g_mutex);
    std::swap(g_sink, sink);
    return sink;
}

}  // namespace sgaudit
