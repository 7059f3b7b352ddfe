#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tresca/elastic.hpp"
#include "tresca/grid.hpp"

namespace tresca {

/// Scalar field on the fault as a function of (x, t).
using FaultFunction = std::function<double(double x, double t)>;

/// Separable body force: nodal force = profile(node) * amplitude(t).
struct BodySource {
  VectorField nodal_force; ///< force per node at unit amplitude (density times lumped area)
  std::function<double(double)> amplitude;

  bool active() const { return nodal_force.size() > 0 && static_cast<bool>(amplitude); }
};

/// Builds nodal forces from a force density b(x, y) via the lumped areas.
template <typename F>
BodySource make_body_source(const ElasticOperator& op, F&& density,
                            std::function<double(double)> amplitude) {
  BodySource s;
  s.nodal_force = sample_field(op.mesh(), density);
  for (Index k = 0; k < s.nodal_force.cols(); ++k)
    s.nodal_force.col(k) *= op.area()(k) * op.free_dofs()(2 * k);
  s.amplitude = std::move(amplitude);
  return s;
}

enum class NormalCondition {
  PrescribedTraction, ///< sigma_n = F_n on both faces
  NoOpening           ///< [u_n] held fixed; F_n only sets the friction bound
};

/// Complete forward problem on [-T, T].
struct Scenario {
  Mesh mesh;
  MaterialField material;
  FaultFunction normal_traction;       ///< F_n(x, t)
  FaultFunction friction_coefficient;  ///< friction coefficient (x, t)
  BodySource source;
  VectorField u0;
  VectorField v0;
  double half_window = 1.0; ///< T
  double dt = 0;
  Index steps = 0;          ///< integration steps from -T
  double c0 = 0;            ///< lower bound on |F_n|
  double c1 = 0;            ///< slip-rate threshold for recovery
  NormalCondition normal = NormalCondition::PrescribedTraction;
  Index snapshot_stride = 1;

  double t_start() const { return -half_window; }
  double time(Index k) const { return t_start() + double(k) * dt; }
  /// Steps covering [-T, T] at the configured dt.
  Index window_steps() const;
};

/// CFL limit 0.4 h / max c_p.
double cfl_limit(const Grid& grid, const MaterialField& material);

/// Throws InvalidArgument when the scenario breaks a hard precondition
/// (fault present, CFL, |F_n| >= c0 > 0, friction coefficient > 0, sizes).
void validate(const Scenario& s);

/// Static state compatible with the prescribed normal traction at t0: solves
/// K u = f(t0) with zero tangential traction on the fault and zero Dirichlet data.
VectorField equilibrium_state(const ElasticOperator& op, const Scenario& s, double t0);

struct CompatibilityCheck {
  std::string name;
  bool passed = false;
  double residual = 0;
};

struct CompatibilityReport {
  std::vector<CompatibilityCheck> checks;
  bool passed() const;
};

/// Checks the t = -T compatibility conditions on the initial data: normal
/// traction equals F_n on both faces, zero tangential traction on both faces,
/// zero tangential velocity on the fault, finite discrete div sigma(u0).
CompatibilityReport check_compatibility(const ElasticOperator& op, const Scenario& s,
                                        double tol = 1e-6);

/// Fault traction vectors (sigma n) seen from each face for a field at rest:
/// plus side f+/a, minus side -f-/a, with f the internal plus source force.
std::pair<VectorField, VectorField> static_face_tractions(const ElasticOperator& op,
                                                          const Scenario& s,
                                                          const VectorField& u, double t);

} // namespace tresca
