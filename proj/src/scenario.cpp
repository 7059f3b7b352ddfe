#include "tresca/scenario.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

namespace tresca {

Index Scenario::window_steps() const {
  return Index(std::llround(2.0 * half_window / dt));
}

double cfl_limit(const Grid& grid, const MaterialField& material) {
  return 0.4 * grid.h / material.max_p_speed();
}

void validate(const Scenario& s) {
  const Grid& grid = s.mesh.grid();
  const FaultTopology* fault = s.mesh.fault();
  if (!fault)
    throw InvalidArgument("scenario needs an embedded fault");
  s.material.validate(grid);
  if (!(s.dt > 0.0))
    throw InvalidArgument("time step must be positive");
  const double limit = cfl_limit(grid, s.material);
  if (s.dt > limit * (1.0 + 1e-12))
    throw InvalidArgument("dt = " + std::to_string(s.dt) + " violates the CFL bound dt <= " +
                          std::to_string(limit) + " (0.4 h / max c_p)");
  if (!(s.half_window > 0.0))
    throw InvalidArgument("half window T must be positive");
  if (s.steps < 0)
    throw InvalidArgument("step count must be non-negative");
  if (!(s.c0 > 0.0))
    throw InvalidArgument("c0 must be positive");
  if (s.c1 < 0.0)
    throw InvalidArgument("c1 must be non-negative");
  if (s.snapshot_stride < 1)
    throw InvalidArgument("snapshot stride must be at least 1");
  if (!s.normal_traction || !s.friction_coefficient)
    throw InvalidArgument("normal traction and friction coefficient must be set");
  const Index n = s.mesh.node_count();
  if (s.u0.cols() != n || s.v0.cols() != n)
    throw InvalidArgument("initial data does not match the mesh");
  for (Index k = 0; k <= s.steps; ++k) {
    const double t = s.time(k);
    for (Index id : fault->plus_ids) {
      const double x = grid.coord(id).x();
      const double fn = s.normal_traction(x, t);
      if (!(std::abs(fn) >= s.c0))
        throw InvalidArgument("|F_n| < c0 at x = " + std::to_string(x) +
                              ", t = " + std::to_string(t));
      if (!(s.friction_coefficient(x, t) > 0.0))
        throw InvalidArgument("friction coefficient must be positive (x = " +
                              std::to_string(x) + ", t = " + std::to_string(t) + ")");
    }
  }
}

namespace {

VectorField external_force(const ElasticOperator& op, const Scenario& s, double t,
                           bool with_normal) {
  VectorField f = VectorField::Zero(2, op.mesh().node_count());
  if (s.source.active())
    f += s.source.amplitude(t) * s.source.nodal_force;
  if (with_normal) {
    const FaultTopology& fault = *op.mesh().fault();
    const double a = op.fault_length();
    for (Index k = 0; k < fault.size(); ++k) {
      const Index p = fault.plus_ids[std::size_t(k)], m = fault.minus_ids[std::size_t(k)];
      const Eigen::Vector2d load =
          a * s.normal_traction(op.mesh().coord(p).x(), t) * fault.normal;
      f.col(p) -= load;
      f.col(m) += load;
    }
  }
  return f;
}

} // namespace

VectorField equilibrium_state(const ElasticOperator& op, const Scenario& s, double t0) {
  const Index ndof = op.dofs();
  const Eigen::VectorXd& free = op.free_dofs();
  std::vector<Index> map(std::size_t(ndof), -1);
  Index nf = 0;
  for (Index d = 0; d < ndof; ++d)
    if (free(d) != 0.0)
      map[std::size_t(d)] = nf++;

  std::vector<Eigen::Triplet<double>> trip;
  const SparseMatrix& k = op.stiffness();
  for (Index r = 0; r < k.outerSize(); ++r) {
    if (map[std::size_t(r)] < 0)
      continue;
    for (SparseMatrix::InnerIterator it(k, r); it; ++it)
      if (map[std::size_t(it.col())] >= 0)
        trip.emplace_back(map[std::size_t(r)], map[std::size_t(it.col())], it.value());
  }
  Eigen::SparseMatrix<double> kff(nf, nf);
  kff.setFromTriplets(trip.begin(), trip.end());

  const VectorField f = external_force(op, s, t0, s.normal == NormalCondition::PrescribedTraction);
  Eigen::VectorXd rhs(nf);
  for (Index d = 0; d < ndof; ++d)
    if (map[std::size_t(d)] >= 0)
      rhs(map[std::size_t(d)]) = f.data()[d];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(kff);
  if (solver.info() != Eigen::Success)
    throw InvalidArgument("stiffness factorization failed");
  const Eigen::VectorXd sol = solver.solve(rhs);

  VectorField u = VectorField::Zero(2, op.mesh().node_count());
  for (Index d = 0; d < ndof; ++d)
    if (map[std::size_t(d)] >= 0)
      u.data()[d] = sol(map[std::size_t(d)]);
  return u;
}

std::pair<VectorField, VectorField> static_face_tractions(const ElasticOperator& op,
                                                          const Scenario& s,
                                                          const VectorField& u, double t) {
  const FaultTopology& fault = *op.mesh().fault();
  const VectorField f = op.internal_force(u) + external_force(op, s, t, false);
  const double a = op.fault_length();
  VectorField plus(2, fault.size()), minus(2, fault.size());
  for (Index k = 0; k < fault.size(); ++k) {
    plus.col(k) = f.col(fault.plus_ids[std::size_t(k)]) / a;
    minus.col(k) = -f.col(fault.minus_ids[std::size_t(k)]) / a;
  }
  return {plus, minus};
}

bool CompatibilityReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed)
      return false;
  return true;
}

CompatibilityReport check_compatibility(const ElasticOperator& op, const Scenario& s,
                                        double tol) {
  const FaultTopology& fault = *op.mesh().fault();
  const double t0 = s.t_start();
  const auto [plus, minus] = static_face_tractions(op, s, s.u0, t0);

  double fn_scale = 1.0, normal_res = 0, tangential_res = 0, velocity_res = 0;
  for (Index k = 0; k < fault.size(); ++k) {
    const double x = op.mesh().coord(fault.plus_ids[std::size_t(k)]).x();
    const double fn = s.normal_traction(x, t0);
    fn_scale = std::max(fn_scale, std::abs(fn));
    for (const VectorField* side : {&plus, &minus}) {
      const auto parts = split_traction(Eigen::Vector2d(side->col(k)), fault.normal);
      normal_res = std::max(normal_res, std::abs(parts.normal - fn));
      tangential_res = std::max(tangential_res, parts.tangential.norm());
    }
    for (Index id : {fault.plus_ids[std::size_t(k)], fault.minus_ids[std::size_t(k)]})
      velocity_res = std::max(velocity_res, std::abs(s.v0.col(id).dot(fault.tangent)));
  }

  // div sigma(u0) away from the fault and the boundary
  const VectorField div = op.divergence_of_stress(s.u0);
  double div_norm = 0;
  const double h2 = op.mesh().grid().h * op.mesh().grid().h;
  for (Index n = 0; n < op.mesh().node_count(); ++n) {
    const Index b = op.mesh().base_of(n);
    if (op.mesh().is_boundary(n) || n != b ||
        (fault.local(op.mesh().grid().col(b)) >= 0 && op.mesh().grid().row(b) == fault.row))
      continue;
    div_norm += h2 * div.col(n).squaredNorm();
  }
  div_norm = std::sqrt(div_norm);

  const double vscale = std::max(1.0, s.v0.cwiseAbs().maxCoeff());
  CompatibilityReport r;
  r.checks.push_back({"normal traction equals F_n on both faces", normal_res <= tol * fn_scale,
                      normal_res});
  r.checks.push_back({"zero tangential traction on both faces", tangential_res <= tol * fn_scale,
                      tangential_res});
  r.checks.push_back({"zero tangential velocity on the fault", velocity_res <= tol * vscale,
                      velocity_res});
  r.checks.push_back({"div sigma(u0) square-summable", std::isfinite(div_norm), div_norm});
  return r;
}

} // namespace tresca
