#pragma once

#include <stdexcept>
#include <string>

namespace oscilap {

/// Configuration file problems (unknown keys, out-of-range values).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature budget exhausted during stiffness assembly.
struct AssemblyError : std::runtime_error {
    explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

/// Fewer sign-negativity intervals than requested ladder depth.
struct LadderExhaustedError : std::runtime_error {
    LadderExhaustedError(int found, int requested)
        : std::runtime_error("ladder exhausted: found " + std::to_string(found) +
                             " of " + std::to_string(requested) +
                             " negativity intervals"),
          found_count(found),
          requested_count(requested) {}
    int found_count;
    int requested_count;
};

/// No multistart seed converged within the iteration budget.
struct NonConvergenceError : std::runtime_error {
    explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature tolerance not reached within its evaluation budget.
struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oscilap
