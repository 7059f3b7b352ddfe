#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tresca/friction.hpp"
#include "tresca/scenario.hpp"

namespace tresca {

enum class SlipMode : std::uint8_t { Stick, Slip };

/// Fault quantities of one integration step, one entry per fault node.
struct FaultState {
  double t = 0;
  Eigen::VectorXd normal_load;      ///< prescribed F_n
  Eigen::VectorXd normal_traction;  ///< applied sigma_n
  Eigen::VectorXd traction;         ///< sigma_tau (signed along the tangent)
  Eigen::VectorXd bound;            ///< g = friction coefficient * |F_n|
  Eigen::VectorXd slip;             ///< [u_tau] after the step
  Eigen::VectorXd slip_rate;        ///< [v_tau] over the step
  std::vector<SlipMode> mode;

  static FaultState zeros(Index n);
};

/// Displacement u_k and the velocity of the half step leading to it.
/// Before the first step `velocity` is the initial velocity v0 itself.
struct WavefieldState {
  VectorField u;
  VectorField velocity;
  double t = 0;
  Index step = 0;
};

/// Raw per-step energy terms; see energy_report for the balance.
struct EnergyTerms {
  double kinetic = 0;       ///< 1/2 v' M v at the new half step
  double strain = 0;        ///< 1/2 u_k' K u_{k+1}
  double work = 0;          ///< external work increment (source and normal traction)
  double dissipation = 0;   ///< sum a g |slip rate| dt
  bool balance_defined = false; ///< false for the start-up half step
};

struct EnergyBalance {
  std::vector<double> time;
  std::vector<double> kinetic;
  std::vector<double> strain;
  std::vector<double> work;        ///< cumulative external work
  std::vector<double> dissipation; ///< cumulative friction dissipation
  std::vector<double> residual;    ///< (E - E_start) + D - W
  double max_energy = 0;
};

struct TrajectoryRecord {
  double t_start = 0;
  double dt = 0;
  Index steps = 0;
  Index stride = 1;
  std::vector<Index> snapshot_steps;
  std::vector<VectorField> snapshots;  ///< u at snapshot_steps
  std::vector<FaultState> fault;       ///< one entry per step
  std::vector<EnergyTerms> energy;     ///< one entry per step
  double lambda0 = 0;                  ///< energy-class norm of the trajectory
  CompatibilityReport compatibility;

  double time(Index k) const { return t_start + double(k) * dt; }
  /// Snapshot of step k; throws if it was not recorded.
  const VectorField& at_step(Index k) const;
  bool has_step(Index k) const;
};

/// Explicit leapfrog with traction-at-split-nodes friction enforcement.
class ForwardSolver {
public:
  explicit ForwardSolver(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  const ElasticOperator& op() const { return op_; }

  WavefieldState initial_state() const;

  /// Advances one step. The returned FaultState holds the traction applied
  /// over the step and the resulting slip rate.
  std::pair<WavefieldState, FaultState> step(const WavefieldState& state,
                                             EnergyTerms* energy = nullptr) const;

  TrajectoryRecord simulate() const;

  /// Impedance linking a traction change to a velocity jump for fault node k
  /// when the kick has length `kick`.
  double impedance(Index k, double kick) const;

private:
  Scenario scenario_;
  ElasticOperator op_;
  Eigen::VectorXd fault_x_;
};

TrajectoryRecord simulate(const Scenario& scenario);

EnergyBalance energy_report(const TrajectoryRecord& trajectory);

/// Largest violation of |sigma_tau| <= g + tol_c and of the co-direction
/// identity, in absolute units.
struct ComplementarityReport {
  double max_bound_excess = 0;   ///< max(|sigma_tau| - g)
  double max_codirection = 0;    ///< max |sigma_tau s - g |s|| - tol * (g|s| + scale)
  double max_stick_rate = 0;     ///< max |s| over stick entries
  Index worst_step = -1;
  Index worst_node = -1;
  bool passed = true;
};

ComplementarityReport check_complementarity(const std::vector<FaultState>& history,
                                            double traction_scale, double tol = 1e-8);

/// Discrete left side of the friction variational inequality at step k for a
/// test velocity field w (zero on the Dirichlet boundary).
double variational_inequality_lhs(const ForwardSolver& solver, const TrajectoryRecord& traj,
                                  Index k, const VectorField& w);

/// FaultState history as CSV: t,x,F_n,sigma_tau,g,slip,slip_rate,mode
void write_fault_csv(std::ostream& os, const Mesh& mesh, const std::vector<FaultState>& history);
std::vector<FaultState> read_fault_csv(std::istream& is, Index fault_nodes);

void write_energy_csv(std::ostream& os, const EnergyBalance& e);

} // namespace tresca
