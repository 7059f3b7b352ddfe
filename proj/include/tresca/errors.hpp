#pragma once

#include <stdexcept>
#include <string>

namespace tresca {

/// Precondition on an argument was not met.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Fault or region geometry contradicts the required topology.
class GeometryViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The time integrator produced non-finite values.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error("divergence at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

} // namespace tresca
