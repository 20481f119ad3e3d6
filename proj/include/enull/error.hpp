#pragma once

#include <stdexcept>
#include <string>

namespace enull {

// Bad inputs (malformed files, invalid arguments): CLI exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (non-convergence, degenerate data): CLI exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace enull
