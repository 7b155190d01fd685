#pragma once
// Exception taxonomy. std::invalid_argument is used directly for malformed inputs
// (bad sizes, non-positive steps); the types below cover domain-specific failures.

#include <stdexcept>
#include <string>
#include <vector>

namespace noisefid {

// A physical or configuration constraint was violated (segment below the hardware
// floor, setpoint outside the calibration domain, unrealizable composite pulse, ...).
class ConstraintViolation : public std::runtime_error {
 public:
  explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};

// The SSE integrator's pre-renormalization state norm drifted beyond tolerance.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(const std::string& what, double norm_drift)
      : std::runtime_error(what), norm_drift(norm_drift) {}
  double norm_drift;
};

// A nonlinear fit failed to converge or was handed degenerate data.
class FitFailed : public std::runtime_error {
 public:
  explicit FitFailed(const std::string& what) : std::runtime_error(what) {}
};

// Replay inputs could not be aligned (missing trace/measurement ids, shape mismatch).
class AlignmentError : public std::runtime_error {
 public:
  AlignmentError(const std::string& what, std::vector<std::string> missing = {})
      : std::runtime_error(what), missing(std::move(missing)) {}
  std::vector<std::string> missing;
};

}  // namespace noisefid
