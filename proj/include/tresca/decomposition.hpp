#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "tresca/elastic.hpp"
#include "tresca/norms.hpp"

namespace tresca {

/// (u, div u, curl u) on the nodes of a sampled field whose centred
/// stencils stay inside the samples.
struct DecomposedField {
  SampledField u;      ///< restricted to `nodes` below
  Eigen::MatrixXd div; ///< nodes x times
  Eigen::MatrixXd curl;
};

/// Central-difference divergence and scalar curl per time level.
/// Throws InvalidArgument if any sample lies on or next to the fault line.
DecomposedField decompose(const SampledField& u, const Grid& grid,
                          const FaultTopology* fault = nullptr);

/// Local space-time average with a cos^2 kernel of the given radius (same
/// physical radius in x, y and t). Keeps the nodes and times whose kernel
/// support lies inside the samples. Needs uniform times.
///
/// For constant coefficients the residual operators commute with this
/// average, so residuals of the averaged field are the weak residuals of the
/// raw one. Fields with slip fronts are not smooth enough for the pointwise
/// residual to converge, but their weak residual does.
SampledField mollify(const SampledField& u, const Grid& grid, double radius);

/// First-order couplings A of the system for the stacked unknown
/// q = (u_x, u_y, v, w): A q = bx dq/dx + by dq/dy + c q, row by row.
/// Either one matrix (constant) or one per decomposed node.
struct CouplingFields {
  std::vector<Eigen::Matrix4d> bx, by, c;

  /// The constant-coefficient couplings: only the u rows see -((lambda+mu)/mu) grad v.
  static CouplingFields constant(double lambda, double mu);
};

struct SystemResidual {
  double r_u = 0, r_v = 0, r_w = 0;
};

/// L2 norms over interior nodes and interior times of
///   r_u = (rho/mu) u_tt - lap u + A_1,
///   r_v = (rho/(lambda+2mu)) v_tt - lap v + A_2,
///   r_w = (rho/mu) w_tt - lap w + A_3.
/// Needs uniform time sampling with at least three levels.
SystemResidual system_residual(const DecomposedField& dec, const Grid& grid, double rho,
                               double lambda, double mu, double dt,
                               const CouplingFields* coupling = nullptr);

struct ResidualLevel {
  double h = 0;
  SystemResidual residual;
};

/// CSV: h,r_u,r_v,r_w,order_u,order_v,order_w with orders against the
/// previous (coarser) row.
void write_residual_csv(std::ostream& os, const std::vector<ResidualLevel>& levels);

} // namespace tresca
