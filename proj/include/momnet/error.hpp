#pragma once

#include <stdexcept>
#include <string>

namespace momnet {

// Mismatched vector/operator/image dimensions.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Invalid parameter value or malformed configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values encountered during a numerical run.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require_dims(std::size_t got, std::size_t expected, const char* what) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace momnet
