#include "tresca/norms.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tresca/errors.hpp"

namespace tresca {

namespace {

struct Layout {
  const Grid& grid;
  std::unordered_map<Index, Index> slot;

  Layout(const Grid& g, const std::vector<Index>& nodes) : grid(g) {
    slot.reserve(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k)
      slot.emplace(nodes[k], Index(k));
  }
  // Slot of the node offset by (di, dj) from base id, or -1.
  Index neighbor(Index id, Index di, Index dj) const {
    const Index i = grid.col(id) + di, j = grid.row(id) + dj;
    if (j < 0 || j >= grid.ny)
      return -1;
    Index ii = i;
    if (grid.periodic_x)
      ii = grid.wrap(i);
    else if (i < 0 || i >= grid.nx)
      return -1;
    auto it = slot.find(grid.id(ii, j));
    return it == slot.end() ? -1 : it->second;
  }
};

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  if (t.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    w[k] += 0.5 * dt;
    w[k + 1] += 0.5 * dt;
  }
  return w;
}

using Col = Eigen::MatrixXd::ConstColXpr;

// Spatial squared norms of one time level: {L2, first differences, second differences}.
struct SpatialParts {
  double l2 = 0, d1 = 0, d2 = 0;
};

SpatialParts spatial_parts(const Layout& lay, const std::vector<Index>& nodes,
                           const Eigen::VectorXd& v, bool need_second) {
  const double h = lay.grid.h, h2 = h * h;
  SpatialParts p;
  auto at = [&](Index s) { return v.segment<2>(2 * s); };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Index id = nodes[k];
    const Eigen::Vector2d u = at(Index(k));
    p.l2 += h2 * u.squaredNorm();
    const Index xp = lay.neighbor(id, 1, 0), yp = lay.neighbor(id, 0, 1);
    if (xp >= 0)
      p.d1 += h2 * ((at(xp) - u) / h).squaredNorm();
    if (yp >= 0)
      p.d1 += h2 * ((at(yp) - u) / h).squaredNorm();
    if (!need_second)
      continue;
    const Index xm = lay.neighbor(id, -1, 0), ym = lay.neighbor(id, 0, -1);
    if (xp >= 0 && xm >= 0)
      p.d2 += h2 * ((at(xp) - 2 * u + at(xm)) / h2).squaredNorm();
    if (yp >= 0 && ym >= 0)
      p.d2 += h2 * ((at(yp) - 2 * u + at(ym)) / h2).squaredNorm();
    const Index xy = lay.neighbor(id, 1, 1);
    if (xp >= 0 && yp >= 0 && xy >= 0)
      p.d2 += h2 * ((at(xy) - at(xp) - at(yp) + u) / h2).squaredNorm();
  }
  return p;
}

double space_time_norm(const Layout& lay, const SampledField& f, int order) {
  const auto w = trapezoid_weights(f.times);
  const Index nt = f.time_count();
  double sum = 0;
  for (Index k = 0; k < nt; ++k) {
    const SpatialParts p = spatial_parts(lay, f.nodes, f.values.col(k), order >= 2);
    sum += w[std::size_t(k)] * (p.l2 + (order >= 1 ? p.d1 : 0.0) + (order >= 2 ? p.d2 : 0.0));
  }
  if (order == 0 || nt < 2)
    return std::sqrt(sum);

  const double h2 = lay.grid.h * lay.grid.h;
  // first time differences on intervals, weighted by interval length
  for (Index k = 0; k + 1 < nt; ++k) {
    const double dt = f.times[std::size_t(k + 1)] - f.times[std::size_t(k)];
    const Eigen::VectorXd d = (f.values.col(k + 1) - f.values.col(k)) / dt;
    sum += dt * h2 * d.squaredNorm();
    if (order >= 2) {
      // mixed space-time differences
      const SpatialParts p = spatial_parts(lay, f.nodes, d, false);
      sum += dt * p.d1;
    }
  }
  if (order >= 2)
    for (Index k = 1; k + 1 < nt; ++k) {
      const double dm = f.times[std::size_t(k)] - f.times[std::size_t(k - 1)];
      const double dp = f.times[std::size_t(k + 1)] - f.times[std::size_t(k)];
      const Eigen::VectorXd d2 = ((f.values.col(k + 1) - f.values.col(k)) / dp -
                                  (f.values.col(k) - f.values.col(k - 1)) / dm) /
                                 (0.5 * (dm + dp));
      sum += 0.5 * (dm + dp) * h2 * d2.squaredNorm();
    }
  return std::sqrt(sum);
}

double energy_class(const Layout& lay, const SampledField& f) {
  const Index nt = f.time_count();
  const auto& t = f.times;
  auto velocity = [&](Index k) -> Eigen::VectorXd {
    if (nt < 2)
      return Eigen::VectorXd::Zero(f.values.rows());
    const Index a = std::max<Index>(k - 1, 0), b = std::min<Index>(k + 1, nt - 1);
    return (f.values.col(b) - f.values.col(a)) / (t[std::size_t(b)] - t[std::size_t(a)]);
  };
  auto accel = [&](Index k) -> Eigen::VectorXd {
    if (nt < 3)
      return Eigen::VectorXd::Zero(f.values.rows());
    const Index c = std::clamp<Index>(k, 1, nt - 2);
    const double dm = t[std::size_t(c)] - t[std::size_t(c - 1)];
    const double dp = t[std::size_t(c + 1)] - t[std::size_t(c)];
    return ((f.values.col(c + 1) - f.values.col(c)) / dp -
            (f.values.col(c) - f.values.col(c - 1)) / dm) /
           (0.5 * (dm + dp));
  };
  double sup_h1 = 0, sup_l2 = 0;
  for (Index k = 0; k < nt; ++k) {
    const Eigen::VectorXd u = f.values.col(k), v = velocity(k), a = accel(k);
    const SpatialParts pu = spatial_parts(lay, f.nodes, u, false);
    const SpatialParts pv = spatial_parts(lay, f.nodes, v, false);
    const SpatialParts pa = spatial_parts(lay, f.nodes, a, false);
    sup_h1 = std::max(sup_h1, std::sqrt(pu.l2 + pu.d1) + std::sqrt(pv.l2 + pv.d1));
    sup_l2 = std::max(sup_l2, std::sqrt(pu.l2) + std::sqrt(pv.l2) + std::sqrt(pa.l2));
  }
  return sup_h1 + sup_l2;
}

} // namespace

double discrete_norm(const Grid& grid, const SampledField& field, NormKind kind) {
  if (field.nodes.empty())
    throw InvalidArgument("discrete_norm over an empty region");
  if (field.times.empty())
    throw InvalidArgument("discrete_norm over an empty time window");
  if (field.values.rows() != 2 * field.node_count() || field.values.cols() != field.time_count())
    throw InvalidArgument("sampled values do not match nodes x times");
  const Layout lay(grid, field.nodes);
  switch (kind) {
  case NormKind::L2: return space_time_norm(lay, field, 0);
  case NormKind::H1: return space_time_norm(lay, field, 1);
  case NormKind::H2: return space_time_norm(lay, field, 2);
  case NormKind::EnergyClass: return energy_class(lay, field);
  }
  return 0.0;
}

SampledField with_values(const SampledField& field, Eigen::MatrixXd values) {
  SampledField out{field.nodes, field.times, std::move(values)};
  return out;
}

} // namespace tresca
