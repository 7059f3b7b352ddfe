#pragma once

#include <vector>

#include <Eigen/Core>

#include "tresca/grid.hpp"

namespace tresca {

/// Vector samples on a node subset of the base lattice over a time grid.
/// values has 2*nodes.size() rows (x, y interleaved per node) and one
/// column per sample time.
struct SampledField {
  std::vector<Index> nodes;
  std::vector<double> times;
  Eigen::MatrixXd values;

  Index node_count() const { return Index(nodes.size()); }
  Index time_count() const { return Index(times.size()); }
};

enum class NormKind { L2, H1, H2, EnergyClass };

/// Discrete space-time norm over the sampled region.
///
/// Space uses midpoint weights h^2 per node, time the trapezoid rule (a single
/// sample counts with unit weight). H1 and H2 add every first and second
/// difference quotient in (x, y, t) whose stencil lies inside the samples.
/// EnergyClass is sup_t(|u|_H1 + |u_t|_H1) + sup_t(|u| + |u_t| + |u_tt|) with
/// spatial norms per time level.
double discrete_norm(const Grid& grid, const SampledField& field, NormKind kind);

/// Copies field and replaces its values.
SampledField with_values(const SampledField& field, Eigen::MatrixXd values);

} // namespace tresca
