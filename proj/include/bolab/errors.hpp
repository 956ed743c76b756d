#pragma once

#include <stdexcept>
#include <string>

namespace bolab {

/// Rejected input: bad parameters, malformed files, broken invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while integrating in time. Carries the simulation time at which it happened.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double time)
      : std::runtime_error(what + " (t=" + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class CflViolation : public SolverError {
 public:
  using SolverError::SolverError;
};

class BlowUp : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace bolab
