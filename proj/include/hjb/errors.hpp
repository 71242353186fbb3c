#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

/// Malformed or missing input (configuration files, option values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: CFL violation, divergence, non-finite values,
/// iteration caps.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hjb
