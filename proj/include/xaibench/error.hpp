#pragma once

#include <stdexcept>
#include <string>

namespace xaibench {

enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    config = 2,
    io = 3,
    format = 4,
    stage_order = 5,
    shape = 6,
    unsupported = 7,
    training = 8,
    sample_shortfall = 9,
    numeric = 10,
    internal = 11,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// Writes "level=... msg=..." lines to stderr; keeps stdout machine-readable.
void log_warning(const std::string& message);
void log_info(const std::string& message);

} // namespace xaibench
