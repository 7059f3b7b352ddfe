#pragma once

#include <functional>

#include "tresca/scenario.hpp"

namespace tresca {

/// Unit-square rupture problem: horizontal fault segment, body-force pulse
/// above it, constant material. Everything a config file can override.
struct RuptureSetup {
  Index cells = 100;          ///< cells per side
  double extent = 1.0;        ///< side length
  double rho = 1.0, lambda = 1.0, mu = 1.0;
  double fault_y = 0.5;
  double fault_x0 = 0.25, fault_x1 = 0.75;

  FaultFunction normal_traction;      ///< defaults to -1
  FaultFunction friction_coefficient; ///< defaults to 0.6 + 0.1 sin(2 pi x) cos(pi t / T)

  double half_window = 1.0;
  double dt = 0;              ///< 0 picks min(0.2 h, 0.9 x CFL limit)
  Index steps = -1;           ///< -1 covers [-T, T]
  double c0 = 0.5;
  double c1 = 0.4;
  NormalCondition normal = NormalCondition::PrescribedTraction;
  Index snapshot_stride = 1;

  // body force fx = amplitude(t) * bump(x; cx, wx) * bump(y; cy, wy)
  double source_amplitude = 80.0;
  double source_cx = 0.5, source_wx = 0.3;
  double source_cy = 0.62, source_wy = 0.08;
  double source_period = 1.0; ///< period of the oscillating drive
  double source_ramp = 0.4;   ///< smooth onset duration

  /// Start from the static state under the t = -T loads (otherwise zero).
  bool prestress = true;

  // observation geometry
  std::vector<Rect> patch{{0.1, 0.9, 0.58, 0.7}, {0.1, 0.9, 0.3, 0.42}};
  double collar_r0 = 0.05;
  double delta = 0; ///< 0 means h
};

/// Smooth compact bump: cos^2 over |s - c| < w, zero outside.
double bump(double s, double c, double w);

/// Drive amplitude: smooth ramp from -T times sin(2 pi (t + T) / period).
std::function<double(double)> drive_amplitude(const RuptureSetup& setup);

/// Reference friction coefficient 0.6 + 0.1 sin(2 pi x) cos(pi t / T).
FaultFunction reference_friction(double half_window);

Scenario build_scenario(const RuptureSetup& setup);

RegionSet build_regions(const RuptureSetup& setup, const Scenario& scenario);

} // namespace tresca
