#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tresca/continuation.hpp"
#include "tresca/observation.hpp"
#include "tresca/solver.hpp"

namespace tresca {

/// Displacement levels of a field around the fault, addressed by global step.
struct FieldHistory {
  std::function<const VectorField&(Index step)> at;
  Index first = 0; ///< first available step
  Index last = 0;  ///< last available step
  double t_start = 0;
  double dt = 0;

  double time(Index k) const { return t_start + double(k) * dt; }
  static FieldHistory of(const TrajectoryRecord& traj);
};

/// Fault tractions and slip-rate jumps, fault nodes x sample times.
struct FaultTraceSeries {
  std::vector<double> x;
  std::vector<double> times;
  std::vector<Index> steps;
  Eigen::MatrixXd sigma_n;
  Eigen::MatrixXd sigma_tau;
  Eigen::MatrixXd jump_rate;
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> valid;
  double c1 = 0;

  double coverage() const;
};

/// Tractions from the half-cell momentum balance of each fault copy, averaged
/// over the two sides; jump rate by centred differences of the tangential jump.
/// Throws InvalidArgument if [t0, t1] needs levels outside the history.
FaultTraceSeries fault_trace(const ElasticOperator& op, const BodySource& source,
                             const FieldHistory& field, double t0, double t1, double c1);

/// rho(xi) = xi / max(|xi|, c).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
lipschitz_direction(const Eigen::MatrixBase<Derived>& xi, typename Derived::Scalar c) {
  using Scalar = typename Derived::Scalar;
  if (!(c > Scalar(0)))
    throw InvalidArgument("lipschitz_direction needs c > 0");
  using std::max;
  return xi / max(xi.norm(), c);
}

inline double lipschitz_direction(double xi, double c) {
  if (!(c > 0.0))
    throw InvalidArgument("lipschitz_direction needs c > 0");
  return xi / std::max(std::abs(xi), c);
}

/// |sigma_tau| on valid entries (NaN elsewhere) plus co-direction flags.
struct FrictionBound {
  Eigen::MatrixXd g;
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> inconsistent;
  Index inconsistent_count = 0;
};

FrictionBound friction_bound(const FaultTraceSeries& trace);

/// g / |sigma_n| where g is defined and |sigma_n| >= c0, NaN elsewhere.
Eigen::MatrixXd friction_coefficient(const Eigen::MatrixXd& g, const Eigen::MatrixXd& sigma_n,
                                     double c0);

enum class RecoveryMode { ClosedLoop, FullInverse };
std::string to_string(RecoveryMode mode);
RecoveryMode parse_recovery_mode(const std::string& s);

struct RecoveryOptions {
  ContinuationProblem continuation;  ///< scenario/obs/regions are filled in by recover
  std::vector<double> traction_alpha{1e-12};
  Index traction_iterations = 600;
  double traction_tolerance = 1e-10;
  // column scale of the traction unknowns against the initial-state ones
  double traction_scale = 10.0;
  // the traction solve runs this much past +-T/2 on each side, as a fraction of T;
  // traction near the end of a window is barely seen by the data
  double window_margin = 0.1;
  bool accept_unconverged = false; ///< use the best continuation iterate instead of failing
};

/// Whole-mesh field with an inferred fault traction.
struct TractionSolve {
  std::vector<VectorField> levels; ///< full-mesh fields
  Index first = 0;                 ///< trajectory step of levels[0]
  double misfit = 0;
  Index iterations = 0;
};

/// Solve over the window of `rec` for the initial state and the tangential
/// fault traction history, with the normal traction prescribed and the patch
/// data as targets. Noisy data stop at the discrepancy target.
TractionSolve traction_solve(const Scenario& scenario, const ObservationSet& obs,
                             const ReconstructedField& rec, const RecoveryOptions& options);

struct FrictionEstimate {
  FaultTraceSeries trace;
  Eigen::MatrixXd g_hat;
  Eigen::MatrixXd f_hat;
  Eigen::MatrixXd f_true;
  Eigen::MatrixXd error;      ///< f_hat - f_true where defined
  double coverage = 0;        ///< defined entries / all entries
  double relative_error = std::nan("");
  Index inconsistent = 0;
  bool slipping = false;      ///< false: no entry met the slip-rate threshold
  std::string outcome;        ///< "ok" or "no slipping region"
  ReconstructedField continuation; ///< full-inverse only
  double traction_misfit = 0;
  Index traction_iterations = 0;
};

/// Raised when the continuation stops without meeting its tolerance.
class ContinuationError : public std::runtime_error {
public:
  ContinuationError(const std::string& what, ReconstructedField best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const ReconstructedField& best() const { return best_; }

private:
  ReconstructedField best_;
};

/// Closed-loop reads the fault neighbourhood from `trajectory`; full-inverse
/// continues `obs` to N (which fixes the window and reports collar errors),
/// solves for the fault traction from the patch data, and traces the result. Errors are against the scenario's friction coefficient
/// on [-T/2, T/2].
FrictionEstimate recover(const Scenario& scenario, const RegionSet& regions,
                         const ObservationSet& obs, RecoveryMode mode,
                         const TrajectoryRecord* trajectory = nullptr,
                         const RecoveryOptions& options = {});

struct StabilityCell {
  double eps0 = 0;
  std::uint64_t seed = 0;
  double error = std::nan("");
  std::string status;
};

struct StabilityRow {
  double eps0 = 0;
  double median_error = std::nan("");
  double bound = std::nan(""); ///< fitted C (log|log eps0|)^-1, NaN where undefined
  Index seeds_used = 0;
};

struct StabilityCurve {
  std::vector<StabilityRow> rows;
  std::vector<StabilityCell> cells;
  double fitted_c = std::nan("");
  double exponent = 1.0;
};

/// Full-inverse recovery for every eps0 x seed, median per level, and the
/// smallest C for which C (log|log eps0|)^-1 dominates the medians.
StabilityCurve stability_sweep(const Scenario& scenario, const RegionSet& regions,
                               const ObservationSet& clean, const std::vector<double>& eps0_levels,
                               const std::vector<std::uint64_t>& seeds,
                               const RecoveryOptions& options = {});

void write_estimate_csv(std::ostream& os, const FrictionEstimate& e);
void write_curve_csv(std::ostream& os, const StabilityCurve& c);
/// Median error against eps0 (log x) with the fitted bound drawn where it is defined.
void write_curve_svg(std::ostream& os, const StabilityCurve& c);

} // namespace tresca
