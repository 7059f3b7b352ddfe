#include "tresca/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace tresca {

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian");

void write_snapshot(std::ostream& os, const SnapshotHeader& hd, std::span<const double> data) {
  if (Index(data.size()) != hd.nx * hd.ny * hd.components)
    throw InvalidArgument("snapshot payload does not match its header");
  const std::array<double, 8> raw{SnapshotHeader::kMagic, SnapshotHeader::kVersion,
                                  double(hd.nx),          double(hd.ny),
                                  double(hd.components),  double(hd.time_index),
                                  hd.dt,                  hd.t0};
  os.write(reinterpret_cast<const char*>(raw.data()), sizeof(raw));
  os.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size_bytes()));
}

bool read_snapshot(std::istream& is, SnapshotHeader& hd, std::vector<double>& data) {
  std::array<double, 8> raw{};
  is.read(reinterpret_cast<char*>(raw.data()), sizeof(raw));
  if (is.gcount() == 0)
    return false;
  if (is.gcount() != std::streamsize(sizeof(raw)) || raw[0] != SnapshotHeader::kMagic)
    throw InvalidArgument("not a snapshot record");
  if (raw[1] != SnapshotHeader::kVersion)
    throw InvalidArgument("unsupported snapshot version");
  hd.nx = Index(raw[2]);
  hd.ny = Index(raw[3]);
  hd.components = Index(raw[4]);
  hd.time_index = Index(raw[5]);
  hd.dt = raw[6];
  hd.t0 = raw[7];
  data.resize(std::size_t(hd.nx * hd.ny * hd.components));
  is.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
  if (is.gcount() != std::streamsize(data.size() * sizeof(double)))
    throw InvalidArgument("truncated snapshot record");
  return true;
}

void write_field(std::ostream& os, const Grid& grid, const VectorField& u, Index time_index,
                 double dt, double t0) {
  const SnapshotHeader hd{grid.nx, grid.ny, 2, time_index, dt, t0};
  // node ids are already (j, i) row-major and columns interleave components
  write_snapshot(os, hd, std::span<const double>(u.data(), std::size_t(2 * grid.base_count())));
}

void write_field_csv(std::ostream& os, const Grid& grid, const VectorField& u) {
  os << "i,j,x,y,ux,uy\n";
  os.precision(17);
  for (Index id = 0; id < grid.base_count(); ++id) {
    const Vec2 p = grid.coord(id);
    os << grid.col(id) << ',' << grid.row(id) << ',' << p.x() << ',' << p.y() << ','
       << u(0, id) << ',' << u(1, id) << '\n';
  }
}

} // namespace tresca
