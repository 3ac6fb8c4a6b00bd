#pragma once

#include <stdexcept>
#include <string>

namespace abx {

// Bad input: malformed config, contract violation at the interface.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The computation itself failed: solver stagnation, NaN, tolerance not met.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace abx
