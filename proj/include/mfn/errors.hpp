#pragma once

#include <stdexcept>
#include <string>

namespace mfn {

// Bad configuration file or invalid run setup. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched shapes/grids between values that must agree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Integration exceeded the blow-up guard radius. CLI exit code 2.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(int unit, int step, double norm)
      : std::runtime_error("state norm " + std::to_string(norm) + " exceeded guard at unit " +
                           std::to_string(unit) + ", step " + std::to_string(step)),
        unit_index(unit),
        step_index(step),
        state_norm(norm) {}
  int unit_index;
  int step_index;
  double state_norm;
};

}  // namespace mfn
