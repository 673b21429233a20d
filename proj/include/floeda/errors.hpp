#pragma once

#include <stdexcept>
#include <string>

namespace floeda {

/// Invalid configuration or invalid arguments derived from one. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite state or a numerical contract violation. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace floeda
