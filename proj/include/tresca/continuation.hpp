#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "tresca/observation.hpp"
#include "tresca/scenario.hpp"

namespace tresca {

/// Leapfrog elastic model on a subset of mesh nodes, affine in its inputs.
///
/// Elements enter only if all four corners are active; an active node that
/// loses elements this way has a free (traction-type) edge unless it is
/// flagged Dirichlet. The update matches ForwardSolver::step, half kick
/// first. Controls are scaled so their Euclidean norms are L2 norms:
/// u0 = x_u / h, v0 = x_v / h, force_k = sqrt(h / dt) B x_f(k).
class RegionWaveModel {
public:
  struct Controls {
    Eigen::VectorXd u0, v0; ///< 2 per local node
    Eigen::MatrixXd force;  ///< forcing size x steps

    double dot(const Controls& o) const;
    double squared_norm() const { return dot(*this); }
    Controls& axpy(double a, const Controls& o);
    Controls& scale(double a);
  };

  /// Known inputs layered on the controls.
  struct Drive {
    std::function<void(Index k, Eigen::VectorXd& f)> force;     ///< add nodal forces at level k
    std::function<void(Index k, Eigen::VectorXd& u)> dirichlet; ///< write Dirichlet values at level k
  };

  using Observer = std::function<void(Index k, const Eigen::VectorXd& u)>;
  using Injector = std::function<void(Index k, Eigen::VectorXd& lambda)>;

  RegionWaveModel(const Mesh& mesh, const MaterialField& material, const std::vector<char>& active,
                  const std::vector<char>& dirichlet, double dt, Index steps);

  Index size() const { return Index(nodes_.size()); }
  Index steps() const { return steps_; }
  double dt() const { return dt_; }
  double h() const { return h_; }
  const std::vector<Index>& nodes() const { return nodes_; }
  Index local(Index mesh_id) const { return local_[std::size_t(mesh_id)]; }
  const Eigen::VectorXd& mass() const { return mass_; }
  const Eigen::VectorXd& free_dofs() const { return free_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// Active nodes that lost at least one element to the region cut.
  const std::vector<Index>& cut_nodes() const { return cut_; }

  /// Forcing operator B, 2 size() x m.
  void set_forcing(Eigen::SparseMatrix<double> b) { forcing_ = std::move(b); }
  Index forcing_size() const { return forcing_.cols(); }

  Controls zero_controls() const;

  /// Runs all levels 0..steps; `observe` sees each level's displacement.
  void forward(const Controls& x, const Drive* drive, const Observer& observe) const;

  /// Transpose of the linear map from controls to the sequence of levels:
  /// `inject(k, lambda)` must add the level-k sensitivity into lambda.
  Controls adjoint(const Injector& inject) const;

private:
  double h_, dt_;
  Index steps_;
  std::vector<Index> nodes_;
  std::vector<Index> local_;
  std::vector<Index> cut_;
  SparseMatrix stiffness_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd free_;
  Eigen::VectorXd kick_; ///< free / mass per dof
  Eigen::SparseMatrix<double> forcing_;
};

/// Weighted least squares  1/2 |A x - d|^2 + alpha/2 |x|^2  where A x is the
/// model restricted to observed nodes, with L2(U x window) weights.
class ObservedLeastSquares {
public:
  /// `observed` are local node indices; `data` has 2 per observed node rows
  /// and steps + 1 columns and already excludes the known-input response.
  ObservedLeastSquares(const RegionWaveModel& model, std::vector<Index> observed,
                       Eigen::MatrixXd data);

  /// Weighted residual A x - d.
  Eigen::MatrixXd residual(const RegionWaveModel::Controls& x) const;
  Eigen::MatrixXd apply(const RegionWaveModel::Controls& x) const;
  RegionWaveModel::Controls apply_transpose(const Eigen::MatrixXd& r) const;

  double objective(const RegionWaveModel::Controls& x, double alpha) const;
  RegionWaveModel::Controls gradient(const RegionWaveModel::Controls& x, double alpha) const;

  const RegionWaveModel& model() const { return model_; }
  const Eigen::MatrixXd& data() const { return data_; }
  /// sqrt of the quadrature weight of level k.
  double weight(Index k) const { return weight_(k); }

private:
  const RegionWaveModel& model_;
  std::vector<Index> observed_;
  Eigen::MatrixXd data_;
  Eigen::VectorXd weight_;
};

struct CglsResult {
  RegionWaveModel::Controls x;
  double misfit = 0;      ///< |A x - d|
  double regularizer = 0; ///< |x|^2
  Index iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// Damped CGLS from x0; stops when the gradient norm drops by `tolerance`
/// or when the misfit falls to `stop_misfit`.
CglsResult cgls(const ObservedLeastSquares& ls, double alpha, RegionWaveModel::Controls x0,
                Index max_iterations, double tolerance, double stop_misfit = 0.0);

struct ContinuationProblem {
  const Scenario* scenario = nullptr;
  const ObservationSet* obs = nullptr;
  const RegionSet* regions = nullptr;
  double window = 0;                  ///< reconstruct on [-window, window]; 0 means T/2
  std::vector<double> alpha_ladder;   ///< tried largest first; empty means {1e-2, 1e-4}
  Index max_iterations = 400;         ///< per ladder rung
  double tolerance = 1e-3;            ///< gradient reduction per rung
  double discrepancy_factor = 1.1;
};

struct ReconstructedField {
  SampledField field;          ///< region nodes (base ids) x window times
  std::vector<Index> steps;    ///< trajectory step of each time column
  double data_misfit = 0;
  double zero_misfit = 0;      ///< misfit of the zero control
  double regularizer = 0;
  double alpha = 0;
  Index iterations = 0;
  bool converged = false;
  std::vector<double> alpha_ladder;
  std::vector<double> ladder_misfit;
  std::vector<double> objective_history;
  double noise_target = 0;     ///< discrepancy target in misfit units
};

/// Tikhonov continuation of patch data to N over the observation span,
/// reported on the shrunk window. The ladder runs from the largest weight
/// down, warm-started, and stops at the first weight whose misfit meets the
/// discrepancy target (the smallest weight when the data are noise free).
ReconstructedField continue_wavefield(const ContinuationProblem& problem);

struct CollarError {
  double collar = 0;
  double full = 0;
};

/// L2 error over N_delta x window and over the whole region x window.
CollarError collar_error(const Grid& grid, const ReconstructedField& rec,
                         const TrajectoryRecord& truth, const RegionMask& collar);

/// C (log|log eps0|)^(-c) on 0 < eps0 <= e^-e.
double loglog_bound(double eps0, double C, double c);

/// JSON sidecar for a reconstruction.
void write_reconstruction_sidecar(std::ostream& os, const ReconstructedField& rec);

} // namespace tresca
