#pragma once

#include <stdexcept>
#include <string>

namespace delaysafe {

/// Raised for invalid parameters or configuration files, before any stepping.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while stepping a simulation (non-finite signal, violated precondition).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace delaysafe
