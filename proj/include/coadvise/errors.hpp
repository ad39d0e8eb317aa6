#pragma once

#include <stdexcept>
#include <string>

namespace coadvise {

// Bad flags, out-of-range parameters, unsupported options.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable/malformed input data or data that violates a method's
// preconditions (empty arm, missing column, ...).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace coadvise
