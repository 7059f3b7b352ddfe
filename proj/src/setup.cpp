#include "tresca/setup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tresca {

double bump(double s, double c, double w) {
  const double r = (s - c) / w;
  if (std::abs(r) >= 1.0)
    return 0.0;
  const double q = std::cos(0.5 * std::numbers::pi * r);
  return q * q;
}

std::function<double(double)> drive_amplitude(const RuptureSetup& setup) {
  const double t0 = -setup.half_window, ramp = setup.source_ramp;
  const double amp = setup.source_amplitude, period = setup.source_period;
  return [=](double t) {
    const double s = t - t0;
    if (s <= 0.0)
      return 0.0;
    double r = 1.0;
    if (ramp > 0.0 && s < ramp) {
      const double q = std::sin(0.5 * std::numbers::pi * s / ramp);
      r = q * q;
    }
    return amp * r * (period > 0.0 ? std::sin(2.0 * std::numbers::pi * s / period) : 1.0);
  };
}

FaultFunction reference_friction(double half_window) {
  return [half_window](double x, double t) {
    return 0.6 + 0.1 * std::sin(2.0 * std::numbers::pi * x) *
                     std::cos(std::numbers::pi * t / half_window);
  };
}

Scenario build_scenario(const RuptureSetup& su) {
  if (su.cells < 3)
    throw InvalidArgument("need at least 3 cells per side");
  const double h = su.extent / double(su.cells);
  const Grid grid = build_grid(su.cells + 1, su.cells + 1, h, Vec2::Zero());
  const auto to_index = [&](double v) { return Index(std::llround(v / h)); };
  FaultTopology fault =
      embed_fault(grid, to_index(su.fault_y), to_index(su.fault_x0), to_index(su.fault_x1));

  Scenario s{Mesh(grid, std::move(fault)),
             MaterialField::uniform(grid, su.rho, su.lambda, su.mu),
             su.normal_traction ? su.normal_traction : FaultFunction([](double, double) { return -1.0; }),
             su.friction_coefficient ? su.friction_coefficient : reference_friction(su.half_window),
             {}, {}, {}};
  s.half_window = su.half_window;
  s.dt = su.dt > 0 ? su.dt : std::min(0.2 * h, 0.9 * cfl_limit(grid, s.material));
  s.steps = su.steps >= 0 ? su.steps : s.window_steps();
  s.c0 = su.c0;
  s.c1 = su.c1;
  s.normal = su.normal;
  s.snapshot_stride = su.snapshot_stride;

  const ElasticOperator op(s.mesh, s.material);
  if (su.source_amplitude != 0.0) {
    const double cx = su.source_cx * su.extent, wx = su.source_wx * su.extent;
    const double cy = su.source_cy * su.extent, wy = su.source_wy * su.extent;
    const double fy = su.fault_y;
    s.source = make_body_source(
        op,
        [=](const Vec2& p) {
          // the drive acts on the plus side only, so fault copies never see it
          if (p.y() <= fy)
            return Eigen::Vector2d(0, 0);
          return Eigen::Vector2d(bump(p.x(), cx, wx) * bump(p.y(), cy, wy), 0.0);
        },
        drive_amplitude(su));
  }
  s.v0 = VectorField::Zero(2, s.mesh.node_count());
  s.u0 = su.prestress ? equilibrium_state(op, s, s.t_start())
                      : VectorField::Zero(2, s.mesh.node_count());
  return s;
}

RegionSet build_regions(const RuptureSetup& su, const Scenario& s) {
  const Grid& grid = s.mesh.grid();
  std::vector<Rect> patch = su.patch;
  for (Rect& r : patch) {
    r.x0 *= su.extent;
    r.x1 *= su.extent;
    r.y0 *= su.extent;
    r.y1 *= su.extent;
  }
  return build_regions(grid, s.mesh.fault(), su.collar_r0 * su.extent,
                       su.delta > 0 ? su.delta : grid.h, patch);
}

} // namespace tresca
