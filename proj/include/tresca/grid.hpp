#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tresca {

using Index = Eigen::Index;
using Vec2 = Eigen::Vector2d;

/// Uniform lattice of nx*ny nodes, node (i,j) at origin + h*(i,j).
/// With periodic_x the column nx wraps to column 0.
struct Grid {
  Index nx = 0;
  Index ny = 0;
  double h = 0.0;
  Vec2 origin = Vec2::Zero();
  bool periodic_x = false;

  Index base_count() const { return nx * ny; }
  Index id(Index i, Index j) const { return i + j * nx; }
  Index col(Index id) const { return id % nx; }
  Index row(Index id) const { return id / nx; }
  Vec2 coord(Index i, Index j) const { return origin + h * Vec2(double(i), double(j)); }
  Vec2 coord(Index id) const { return coord(col(id), row(id)); }

  Index element_cols() const { return periodic_x ? nx : nx - 1; }
  Index element_rows() const { return ny - 1; }
  Index wrap(Index i) const { return periodic_x ? (i % nx + nx) % nx : i; }

  double extent_x() const { return (periodic_x ? double(nx) : double(nx - 1)) * h; }
  double extent_y() const { return double(ny - 1) * h; }

  bool on_boundary(Index i, Index j) const {
    return j == 0 || j == ny - 1 || (!periodic_x && (i == 0 || i == nx - 1));
  }
};

Grid build_grid(Index nx, Index ny, double h, const Vec2& origin, bool periodic_x = false);

/// Straight fault along grid row `row`, columns [i_start, i_end], stored as
/// split nodes. The plus copy keeps the base id; minus copies are appended
/// after the base nodes.
struct FaultTopology {
  Index row = 0;
  Index i_start = 0;
  Index i_end = 0;
  std::vector<Index> plus_ids;
  std::vector<Index> minus_ids;
  Vec2 normal = Vec2(0.0, 1.0);
  Vec2 tangent = Vec2(1.0, 0.0);

  Index size() const { return Index(plus_ids.size()); }
  bool contains_column(Index i) const { return i >= i_start && i <= i_end; }
  /// Fault-local index of column i, or -1.
  Index local(Index i) const { return contains_column(i) ? i - i_start : -1; }
};

FaultTopology embed_fault(const Grid& grid, Index row, Index i_start, Index i_end);

/// Grid plus optional fault: node numbering and element connectivity.
class Mesh {
public:
  explicit Mesh(Grid grid, std::optional<FaultTopology> fault = std::nullopt);

  const Grid& grid() const { return grid_; }
  const FaultTopology* fault() const { return fault_ ? &*fault_ : nullptr; }
  bool has_fault() const { return fault_.has_value(); }

  Index node_count() const { return grid_.base_count() + (fault_ ? fault_->size() : 0); }
  Index element_count() const { return grid_.element_cols() * grid_.element_rows(); }

  /// Base grid id a node sits on (minus copies map back to the lattice).
  Index base_of(Index node) const;
  Vec2 coord(Index node) const { return grid_.coord(base_of(node)); }
  bool is_boundary(Index node) const;

  /// Counter-clockwise corners (bl, br, tr, tl) of element (ei, ej),
  /// using minus copies for elements just below the fault.
  std::array<Index, 4> element_nodes(Index ei, Index ej) const;
  std::array<Index, 4> element_nodes(Index e) const {
    return element_nodes(e % grid_.element_cols(), e / grid_.element_cols());
  }

private:
  Grid grid_;
  std::optional<FaultTopology> fault_;
};

struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool contains(const Vec2& p, double tol = 1e-12) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
  }
};

enum class RegionLabel { UPatch, DExtension, NComplement, NDeltaCollar };
std::string to_string(RegionLabel label);

/// Node set over the base lattice (minus copies share their base entry).
struct RegionMask {
  RegionLabel label = RegionLabel::UPatch;
  std::vector<char> inside;

  Index count() const;
  std::vector<Index> nodes() const;
  bool operator[](Index id) const { return inside[std::size_t(id)] != 0; }
};

struct RegionSet {
  RegionMask u_patch;
  RegionMask d_extension;
  RegionMask n_complement;
  RegionMask n_delta_collar;
  double collar_r0 = 0;
  double delta = 0;
  std::vector<std::string> warnings;
};

/// Euclidean distance from p to the closed fault segment.
double distance_to_fault(const Grid& grid, const FaultTopology& fault, const Vec2& p);

/// Distance from a node of N = M \ D to the boundary of N.
double distance_to_n_boundary(const Grid& grid, const FaultTopology* fault, double collar_r0,
                              const Vec2& p);

RegionSet build_regions(const Grid& grid, const FaultTopology* fault, double collar_r0,
                        double delta, const Rect& u_patch);
/// Same with U the union of several rectangles.
RegionSet build_regions(const Grid& grid, const FaultTopology* fault, double collar_r0,
                        double delta, const std::vector<Rect>& u_patch);

/// Node set at distance >= delta from the boundary of N.
RegionMask collar_mask(const Grid& grid, const FaultTopology* fault, double collar_r0,
                       double delta);

/// Violated region invariants, empty when all hold.
std::vector<std::string> check_region_invariants(const Grid& grid, const FaultTopology* fault,
                                                 const RegionSet& regions);

/// One (i, j, label) row per node membership.
void write_masks_csv(std::ostream& os, const Grid& grid, const RegionSet& regions);

} // namespace tresca
