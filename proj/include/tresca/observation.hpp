#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tresca/norms.hpp"
#include "tresca/solver.hpp"

namespace tresca {

/// Wavefield samples on the patch U, plus the noise that was added to them.
struct ObservationSet {
  SampledField data;           ///< patch nodes (base ids) x recorded times
  std::vector<Index> steps;    ///< trajectory step of each time column
  std::vector<Rect> patch;     ///< bounds used to build the patch, if known
  double noise_level = 0;      ///< eps0 in discrete H2 units
  std::uint64_t seed = 0;
};

/// Exact restriction of every recorded snapshot to the patch nodes.
/// Throws GeometryViolation if the patch meets D, InvalidArgument if it is empty.
ObservationSet record(const TrajectoryRecord& trajectory, const RegionMask& patch,
                      const RegionMask& d_extension);
ObservationSet record(const TrajectoryRecord& trajectory, const RegionSet& regions,
                      std::vector<Rect> patch_bounds = {});

/// Smoothed standard-normal field on the samples of `like`, scaled to unit
/// discrete H2 norm.
Eigen::MatrixXd unit_noise(const Grid& grid, const SampledField& like, std::uint64_t seed);

/// Adds smoothed Gaussian noise rescaled so its discrete H2 norm is eps0.
ObservationSet add_noise(const Grid& grid, const ObservationSet& obs, double eps0,
                         std::uint64_t seed);

/// Discrete H2 norm of a - b; throws if the samples do not line up.
double data_distance(const Grid& grid, const ObservationSet& a, const ObservationSet& b);

/// One flat binary record per time (nx = patch nodes, ny = 1, 2 components).
void write_observation(std::ostream& bin, const ObservationSet& obs, double dt);
/// JSON sidecar: patch bounds, node indices, times, eps0, seed.
void write_observation_sidecar(std::ostream& os, const Grid& grid, const ObservationSet& obs);

} // namespace tresca
