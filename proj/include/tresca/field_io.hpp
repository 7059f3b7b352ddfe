#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tresca/elastic.hpp"

namespace tresca {

/// Header of one flat binary record: eight little-endian float64 values
/// followed by nx*ny*components values, row-major (j, i, component).
struct SnapshotHeader {
  static constexpr double kMagic = 1414677843.0; // "TRES"
  static constexpr double kVersion = 1.0;

  Index nx = 0;
  Index ny = 0;
  Index components = 0;
  Index time_index = 0;
  double dt = 0;
  double t0 = 0;
};

void write_snapshot(std::ostream& os, const SnapshotHeader& header, std::span<const double> data);

/// Reads one record; returns false at a clean end of stream.
bool read_snapshot(std::istream& is, SnapshotHeader& header, std::vector<double>& data);

/// Writes the base-lattice part of a nodal field as a record.
void write_field(std::ostream& os, const Grid& grid, const VectorField& u, Index time_index,
                 double dt, double t0);

/// Small-grid CSV: i,j,x,y,ux,uy over the base lattice.
void write_field_csv(std::ostream& os, const Grid& grid, const VectorField& u);

} // namespace tresca
