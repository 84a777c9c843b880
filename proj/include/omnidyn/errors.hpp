#pragma once

#include <stdexcept>
#include <string>

namespace omnidyn {

// Precondition violated by the caller (bad vector, bad parameter block, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values, rank loss, or any other numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration file could not be read, parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace omnidyn
