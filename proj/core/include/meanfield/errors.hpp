#pragma once

#include <stdexcept>
#include <string>

namespace meanfield {

/// A numerical quantity left the finite range (Riccati escape, exploding
/// particle state). Carries the time at which the failure was detected.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Inconsistent run configuration (grid mismatch, bad counts, parse errors).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The model violates a structural requirement (asymmetry, definiteness).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace meanfield
