#include "tresca/observation.hpp"

#include <ostream>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "tresca/field_io.hpp"

namespace tresca {

ObservationSet record(const TrajectoryRecord& traj, const RegionMask& patch,
                      const RegionMask& d_extension) {
  ObservationSet obs;
  for (Index id = 0; id < Index(patch.inside.size()); ++id) {
    if (!patch[id])
      continue;
    if (d_extension[id])
      throw GeometryViolation("observation patch overlaps the fault extension region");
    obs.data.nodes.push_back(id);
  }
  if (obs.data.nodes.empty())
    throw InvalidArgument("observation patch is empty");
  const Index nn = obs.data.node_count(), nt = Index(traj.snapshot_steps.size());
  obs.data.values.resize(2 * nn, nt);
  for (Index k = 0; k < nt; ++k) {
    const Index step = traj.snapshot_steps[std::size_t(k)];
    obs.steps.push_back(step);
    obs.data.times.push_back(traj.time(step));
    const VectorField& u = traj.snapshots[std::size_t(k)];
    for (Index s = 0; s < nn; ++s)
      obs.data.values.block<2, 1>(2 * s, k) = u.col(obs.data.nodes[std::size_t(s)]);
  }
  return obs;
}

ObservationSet record(const TrajectoryRecord& traj, const RegionSet& regions,
                      std::vector<Rect> patch_bounds) {
  ObservationSet obs = record(traj, regions.u_patch, regions.d_extension);
  obs.patch = std::move(patch_bounds);
  return obs;
}

Eigen::MatrixXd unit_noise(const Grid& grid, const SampledField& like, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index rows = like.values.rows(), nt = like.values.cols();
  Eigen::MatrixXd raw(rows, nt);
  for (Index t = 0; t < nt; ++t)
    for (Index r = 0; r < rows; ++r)
      raw(r, t) = normal(rng);

  // one averaging pass over each sample and its space-time neighbours
  std::unordered_map<Index, Index> slot;
  for (std::size_t k = 0; k < like.nodes.size(); ++k)
    slot.emplace(like.nodes[k], Index(k));
  auto neighbor = [&](Index id, Index di, Index dj) -> Index {
    const Index i = grid.col(id) + di, j = grid.row(id) + dj;
    if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny)
      return -1;
    const auto it = slot.find(grid.id(i, j));
    return it == slot.end() ? -1 : it->second;
  };
  std::vector<std::array<Index, 4>> nb(like.nodes.size());
  for (std::size_t k = 0; k < like.nodes.size(); ++k) {
    const Index id = like.nodes[k];
    nb[k] = {neighbor(id, 1, 0), neighbor(id, -1, 0), neighbor(id, 0, 1), neighbor(id, 0, -1)};
  }
  Eigen::MatrixXd smooth(rows, nt);
  for (Index t = 0; t < nt; ++t)
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const Index s = Index(k);
      Eigen::Vector2d acc = raw.block<2, 1>(2 * s, t);
      double count = 1;
      for (Index n : nb[k])
        if (n >= 0) {
          acc += raw.block<2, 1>(2 * n, t);
          ++count;
        }
      if (t > 0) {
        acc += raw.block<2, 1>(2 * s, t - 1);
        ++count;
      }
      if (t + 1 < nt) {
        acc += raw.block<2, 1>(2 * s, t + 1);
        ++count;
      }
      smooth.block<2, 1>(2 * s, t) = acc / count;
    }
  const double norm = discrete_norm(grid, with_values(like, smooth), NormKind::H2);
  if (!(norm > 0.0))
    throw InvalidArgument("noise field has zero norm");
  return smooth / norm;
}

ObservationSet add_noise(const Grid& grid, const ObservationSet& obs, double eps0,
                         std::uint64_t seed) {
  if (!(eps0 >= 0.0))
    throw InvalidArgument("noise level eps0 must be non-negative");
  ObservationSet out = obs;
  out.noise_level = eps0;
  out.seed = seed;
  if (eps0 == 0.0)
    return out;
  out.data.values += eps0 * unit_noise(grid, obs.data, seed);
  return out;
}

double data_distance(const Grid& grid, const ObservationSet& a, const ObservationSet& b) {
  if (a.data.nodes != b.data.nodes)
    throw InvalidArgument("observation sets cover different patches");
  if (a.data.times != b.data.times)
    throw InvalidArgument("observation sets have different sample times");
  return discrete_norm(grid, with_values(a.data, a.data.values - b.data.values), NormKind::H2);
}

void write_observation(std::ostream& bin, const ObservationSet& obs, double dt) {
  const Index nn = obs.data.node_count();
  for (Index k = 0; k < obs.data.time_count(); ++k) {
    const SnapshotHeader hd{nn, 1, 2, obs.steps.empty() ? k : obs.steps[std::size_t(k)], dt,
                            obs.data.times[std::size_t(k)]};
    const Eigen::VectorXd col = obs.data.values.col(k);
    write_snapshot(bin, hd, std::span<const double>(col.data(), std::size_t(col.size())));
  }
}

void write_observation_sidecar(std::ostream& os, const Grid& grid, const ObservationSet& obs) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json bounds = nlohmann::json::array();
  for (const Rect& r : obs.patch)
    bounds.push_back({{"x0", r.x0}, {"x1", r.x1}, {"y0", r.y0}, {"y1", r.y1}});
  j["patch"] = bounds;
  nlohmann::ordered_json nodes = nlohmann::json::array();
  for (Index id : obs.data.nodes)
    nodes.push_back({grid.col(id), grid.row(id)});
  j["nodes"] = nodes;
  j["times"] = obs.data.times;
  j["eps0"] = obs.noise_level;
  j["seed"] = obs.seed;
  os << j.dump(2) << '\n';
}

} // namespace tresca
