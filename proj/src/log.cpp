#include "xaibench/error.hpp"

#include <iostream>
#include <mutex>

namespace xaibench {

namespace {
std::mutex log_mutex;
}

void log_warning(const std::string& message) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "level=warning msg=\"" << message << "\"\n";
}

void log_info(const std::string& message) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::cerr << "level=info msg=\"" << message << "\"\n";
}

} // namespace xaibench
