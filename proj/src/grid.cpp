#include "tresca/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tresca/errors.hpp"

namespace tresca {

Grid build_grid(Index nx, Index ny, double h, const Vec2& origin, bool periodic_x) {
  if (nx < 4 || ny < 4)
    throw InvalidArgument("grid needs nx >= 4 and ny >= 4, got " + std::to_string(nx) + "x" +
                          std::to_string(ny));
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidArgument("grid spacing must be positive");
  if (!origin.allFinite())
    throw InvalidArgument("grid origin must be finite");
  return Grid{nx, ny, h, origin, periodic_x};
}

FaultTopology embed_fault(const Grid& grid, Index row, Index i_start, Index i_end) {
  if (row < 1 || row > grid.ny - 2)
    throw GeometryViolation("fault row " + std::to_string(row) + " touches the outer boundary");
  if (i_start >= i_end)
    throw InvalidArgument("fault needs i_start < i_end");
  if (i_start < 1 || i_end > grid.nx - 2)
    throw GeometryViolation("fault columns [" + std::to_string(i_start) + ", " +
                            std::to_string(i_end) + "] touch the outer boundary");

  FaultTopology f;
  f.row = row;
  f.i_start = i_start;
  f.i_end = i_end;
  const Index n = i_end - i_start + 1;
  f.plus_ids.reserve(std::size_t(n));
  f.minus_ids.reserve(std::size_t(n));
  for (Index k = 0; k < n; ++k) {
    f.plus_ids.push_back(grid.id(i_start + k, row));
    f.minus_ids.push_back(grid.base_count() + k);
  }
  return f;
}

Mesh::Mesh(Grid grid, std::optional<FaultTopology> fault)
    : grid_(grid), fault_(std::move(fault)) {}

Index Mesh::base_of(Index node) const {
  if (node < grid_.base_count())
    return node;
  const Index k = node - grid_.base_count();
  return fault_->plus_ids[std::size_t(k)];
}

bool Mesh::is_boundary(Index node) const {
  const Index b = base_of(node);
  return grid_.on_boundary(grid_.col(b), grid_.row(b));
}

std::array<Index, 4> Mesh::element_nodes(Index ei, Index ej) const {
  const Index i1 = grid_.wrap(ei + 1);
  std::array<Index, 4> n{grid_.id(ei, ej), grid_.id(i1, ej), grid_.id(i1, ej + 1),
                         grid_.id(ei, ej + 1)};
  if (fault_ && ej + 1 == fault_->row) {
    if (fault_->contains_column(i1))
      n[2] = fault_->minus_ids[std::size_t(fault_->local(i1))];
    if (fault_->contains_column(ei))
      n[3] = fault_->minus_ids[std::size_t(fault_->local(ei))];
  }
  return n;
}

std::string to_string(RegionLabel label) {
  switch (label) {
  case RegionLabel::UPatch: return "U_patch";
  case RegionLabel::DExtension: return "D_extension";
  case RegionLabel::NComplement: return "N_complement";
  case RegionLabel::NDeltaCollar: return "N_delta_collar";
  }
  return "unknown";
}

Index RegionMask::count() const {
  return Index(std::count(inside.begin(), inside.end(), char(1)));
}

std::vector<Index> RegionMask::nodes() const {
  std::vector<Index> out;
  for (std::size_t k = 0; k < inside.size(); ++k)
    if (inside[k])
      out.push_back(Index(k));
  return out;
}

double distance_to_fault(const Grid& grid, const FaultTopology& fault, const Vec2& p) {
  const Vec2 a = grid.coord(fault.i_start, fault.row);
  const Vec2 b = grid.coord(fault.i_end, fault.row);
  auto seg = [&](const Vec2& q) {
    const Vec2 ab = b - a;
    const double s = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (q - (a + s * ab)).norm();
  };
  double d = seg(p);
  if (grid.periodic_x) {
    const Vec2 shift(double(grid.nx) * grid.h, 0.0);
    d = std::min({d, seg(p + shift), seg(p - shift)});
  }
  return d;
}

namespace {

double distance_to_outer(const Grid& grid, const Vec2& p) {
  const Vec2 q = p - grid.origin;
  double d = std::min(q.y(), grid.extent_y() - q.y());
  if (!grid.periodic_x)
    d = std::min({d, q.x(), grid.extent_x() - q.x()});
  return d;
}

RegionMask empty_mask(const Grid& grid, RegionLabel label) {
  return RegionMask{label, std::vector<char>(std::size_t(grid.base_count()), 0)};
}

} // namespace

double distance_to_n_boundary(const Grid& grid, const FaultTopology* fault, double collar_r0,
                              const Vec2& p) {
  double d = distance_to_outer(grid, p);
  if (fault)
    d = std::min(d, distance_to_fault(grid, *fault, p) - collar_r0);
  return d;
}

RegionMask collar_mask(const Grid& grid, const FaultTopology* fault, double collar_r0,
                       double delta) {
  RegionMask m = empty_mask(grid, RegionLabel::NDeltaCollar);
  const double tol = 1e-9 * grid.h;
  for (Index id = 0; id < grid.base_count(); ++id) {
    const Vec2 p = grid.coord(id);
    const bool in_d = fault && distance_to_fault(grid, *fault, p) <= collar_r0 + tol;
    if (!in_d && distance_to_n_boundary(grid, fault, collar_r0, p) >= delta - tol)
      m.inside[std::size_t(id)] = 1;
  }
  return m;
}

RegionSet build_regions(const Grid& grid, const FaultTopology* fault, double collar_r0,
                        double delta, const Rect& u_patch) {
  return build_regions(grid, fault, collar_r0, delta, std::vector<Rect>{u_patch});
}

RegionSet build_regions(const Grid& grid, const FaultTopology* fault, double collar_r0,
                        double delta, const std::vector<Rect>& u_patch) {
  if (!(collar_r0 > 0.0))
    throw InvalidArgument("collar_r0 must be positive");
  if (!(delta > 0.0))
    throw InvalidArgument("delta must be positive");
  if (u_patch.empty())
    throw InvalidArgument("u_patch needs at least one rectangle");
  const Vec2 lo = grid.origin;
  const Vec2 hi = grid.origin + Vec2(grid.extent_x(), grid.extent_y());
  for (const Rect& rect : u_patch) {
    if (!(rect.x0 < rect.x1 && rect.y0 < rect.y1))
      throw InvalidArgument("u_patch must be a non-degenerate rectangle");
    if (rect.y0 <= lo.y() || rect.y1 >= hi.y() ||
        (!grid.periodic_x && (rect.x0 <= lo.x() || rect.x1 >= hi.x())))
      throw GeometryViolation("u_patch is not strictly inside the domain");
  }
  auto in_patch = [&](const Vec2& p) {
    return std::any_of(u_patch.begin(), u_patch.end(), [&](const Rect& r) { return r.contains(p); });
  };

  RegionSet r;
  r.collar_r0 = collar_r0;
  r.delta = delta;
  r.u_patch = empty_mask(grid, RegionLabel::UPatch);
  r.d_extension = empty_mask(grid, RegionLabel::DExtension);
  r.n_complement = empty_mask(grid, RegionLabel::NComplement);

  const double tol = 1e-9 * grid.h;
  for (Index id = 0; id < grid.base_count(); ++id) {
    const Vec2 p = grid.coord(id);
    const bool in_d = fault && distance_to_fault(grid, *fault, p) <= collar_r0 + tol;
    if (in_d) {
      if (grid.on_boundary(grid.col(id), grid.row(id)))
        throw GeometryViolation("collar of radius " + std::to_string(collar_r0) +
                                " reaches the outer boundary");
      r.d_extension.inside[std::size_t(id)] = 1;
    } else {
      r.n_complement.inside[std::size_t(id)] = 1;
    }
    if (in_patch(p)) {
      if (in_d)
        throw GeometryViolation("u_patch intersects the fault extension region");
      r.u_patch.inside[std::size_t(id)] = 1;
    }
  }
  if (fault) {
    // the continuous tube must also stay clear of the patch and the boundary
    const Vec2 a = grid.coord(fault->i_start, fault->row);
    const Vec2 b = grid.coord(fault->i_end, fault->row);
    for (const Rect& rect : u_patch) {
      const double gap_x = std::max({rect.x0 - b.x(), a.x() - rect.x1, 0.0});
      const double gap_y = std::max({rect.y0 - a.y(), a.y() - rect.y1, 0.0});
      if (std::hypot(gap_x, gap_y) <= collar_r0)
        throw GeometryViolation("u_patch intersects the fault extension region");
    }
    if (distance_to_outer(grid, a) <= collar_r0 || distance_to_outer(grid, b) <= collar_r0)
      throw GeometryViolation("fault collar reaches the outer boundary");
  }
  if (r.u_patch.count() == 0)
    throw InvalidArgument("u_patch contains no grid nodes");

  r.n_delta_collar = collar_mask(grid, fault, collar_r0, delta);
  if (r.n_delta_collar.count() == 0)
    r.warnings.push_back("degenerate region: N_delta_collar is empty for delta = " +
                         std::to_string(delta));
  return r;
}

std::vector<std::string> check_region_invariants(const Grid& grid, const FaultTopology* fault,
                                                 const RegionSet& regions) {
  std::vector<std::string> bad;
  const auto n = std::size_t(grid.base_count());
  for (std::size_t k = 0; k < n; ++k) {
    const bool u = regions.u_patch.inside[k], d = regions.d_extension.inside[k],
               c = regions.n_complement.inside[k], nd = regions.n_delta_collar.inside[k];
    if (u && d)
      bad.push_back("U_patch meets D_extension at node " + std::to_string(k));
    if (d == c)
      bad.push_back("node " + std::to_string(k) + " not in exactly one of D, N");
    if (nd && !c)
      bad.push_back("N_delta_collar node " + std::to_string(k) + " outside N_complement");
    if (d && grid.on_boundary(grid.col(Index(k)), grid.row(Index(k))))
      bad.push_back("D_extension touches the boundary at node " + std::to_string(k));
  }
  if (fault)
    for (Index id : fault->plus_ids)
      if (!regions.d_extension[id])
        bad.push_back("fault node " + std::to_string(id) + " outside D_extension");
  return bad;
}

void write_masks_csv(std::ostream& os, const Grid& grid, const RegionSet& regions) {
  os << "i,j,label\n";
  const RegionMask* masks[] = {&regions.u_patch, &regions.d_extension, &regions.n_complement,
                               &regions.n_delta_collar};
  for (Index id = 0; id < grid.base_count(); ++id)
    for (const RegionMask* m : masks)
      if ((*m)[id])
        os << grid.col(id) << ',' << grid.row(id) << ',' << to_string(m->label) << '\n';
}

} // namespace tresca
