#pragma once

#include <stdexcept>
#include <string>

namespace insertion {

enum class FailureKind {
  domain,
  escape_trajectory,
  no_pitch_solution,
  consistency,
  mass_depleted,
  singular_costate,
  step_underflow,
  no_convergence,
  validation,
};

inline const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::domain: return "domain error";
    case FailureKind::escape_trajectory: return "escape trajectory";
    case FailureKind::no_pitch_solution: return "no pitch solution";
    case FailureKind::consistency: return "consistency error";
    case FailureKind::mass_depleted: return "mass depleted";
    case FailureKind::singular_costate: return "singular costate";
    case FailureKind::step_underflow: return "step size underflow";
    case FailureKind::no_convergence: return "no convergence";
    case FailureKind::validation: return "validation error";
  }
  return "unknown failure";
}

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(FailureKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FailureKind kind() const noexcept { return kind_; }

 private:
  FailureKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(FailureKind::domain, what) {}
};

/// Non-elliptic state: no finite apogee.
class EscapeTrajectory : public Error {
 public:
  explicit EscapeTrajectory(const std::string& what) : Error(FailureKind::escape_trajectory, what) {}
};

/// The closed-loop pitch equation has no root at this state.
class NoPitchSolution : public Error {
 public:
  explicit NoPitchSolution(const std::string& what) : Error(FailureKind::no_pitch_solution, what) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what) : Error(FailureKind::consistency, what) {}
};

class MassDepleted : public Error {
 public:
  explicit MassDepleted(const std::string& what) : Error(FailureKind::mass_depleted, what) {}
};

/// Velocity costate vanished; thrust direction undefined.
class SingularCostate : public Error {
 public:
  explicit SingularCostate(const std::string& what) : Error(FailureKind::singular_costate, what) {}
};

class StepSizeUnderflow : public Error {
 public:
  explicit StepSizeUnderflow(const std::string& what) : Error(FailureKind::step_underflow, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(FailureKind::validation, what) {}
};

/// A failure raised while integrating; keeps the original kind and the time it happened.
class PropagationError : public Error {
 public:
  PropagationError(FailureKind cause, double time, const std::string& detail)
      : Error(cause, "propagation failed at t = " + std::to_string(time) + " s: " + detail),
        time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Iterative solver gave up. The caller can inspect the best iterate it reports.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(FailureKind::no_convergence, what) {}
};

}  // namespace insertion
