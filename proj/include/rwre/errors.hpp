#pragma once

#include <stdexcept>
#include <string>

// =============================================================================
// errors.hpp
//
// Typed failures. The CLI maps these onto process exit codes:
//   ConfigError   -> 2   (bad experiment description)
//   ResourceError -> 3   (budget / memory guard refused the run)
//   NumericalError-> 4   (solver or estimator failed to converge)
// DomainError marks precondition violations of library operations and also
// maps to exit code 2 when it escapes the CLI.
// =============================================================================

namespace rwre {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rwre
