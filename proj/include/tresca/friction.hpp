#pragma once

#include "tresca/errors.hpp"

namespace tresca {

struct ProjectedTraction {
  double traction = 0;  ///< tangential traction on the fault
  double slip_rate = 0; ///< tangential velocity jump it leaves behind
  bool slipping = false;
};

/// Tresca projection of a trial tangential traction onto [-g, g].
///
/// Stick keeps the trial traction and zero slip rate; slip clamps the
/// traction to g sign(trial) and converts the excess through the impedance.
inline ProjectedTraction friction_projection(double tau_trial, double g, double impedance) {
  if (g < 0.0)
    throw InvalidArgument("friction bound must be non-negative");
  if (!(impedance > 0.0))
    throw InvalidArgument("impedance must be positive");
  if (tau_trial <= g && tau_trial >= -g)
    return {tau_trial, 0.0, false};
  const double t = tau_trial > 0.0 ? g : -g;
  return {t, (tau_trial - t) / impedance, true};
}

} // namespace tresca
