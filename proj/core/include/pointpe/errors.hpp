#pragma once

#include <stdexcept>
#include <string>

namespace pointpe {

/// Invalid configuration (bad flags, malformed config document, mismatched
/// checkpoint). CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Broken input data (unreadable file, parse failure, empty dataset).
/// CLI exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (singular systems, non-finite values, infeasible
/// reductions). CLI exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pointpe
