// Acceptance run: one pass/fail line per criterion, exit status 1 if any fail.
//
// Usage: acceptance [output dir] [criterion ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "tresca/continuation.hpp"
#include "tresca/decomposition.hpp"
#include "tresca/friction.hpp"
#include "tresca/recovery.hpp"
#include "tresca/setup.hpp"
#include "tresca/solver.hpp"

using namespace tresca;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

fs::path out_dir = "acceptance_out";

// The slipping rupture run shared by criteria 1 and 2.
struct BigRun {
  Scenario scenario;
  TrajectoryRecord traj;
  double seconds = 0;
};

const BigRun& big_run() {
  static const BigRun run = [] {
    RuptureSetup su;
    su.cells = 200;
    su.snapshot_stride = 100;
    BigRun r{build_scenario(su), {}, 0};
    const auto t0 = Clock::now();
    r.traj = simulate(r.scenario);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome complementarity() {
  const BigRun& r = big_run();
  double scale = 0;
  for (const FaultState& f : r.traj.fault)
    scale = std::max(scale, f.normal_load.cwiseAbs().maxCoeff());
  double excess = -1e300, codir = 0;
  Index slipping = 0;
  for (const FaultState& f : r.traj.fault)
    for (Index i = 0; i < f.traction.size(); ++i) {
      const double tau = f.traction(i), g = f.bound(i), s = f.slip_rate(i);
      excess = std::max(excess, std::abs(tau) - g);
      codir = std::max(codir, std::abs(tau * s - g * std::abs(s)) / (g * std::abs(s) + scale));
      slipping += s != 0.0;
    }
  const bool ok = r.traj.steps == 2000 && slipping > 0 && excess <= 1e-8 * scale && codir <= 1e-8 &&
                  r.seconds <= 120.0;
  return {ok, "200x200, " + std::to_string(r.traj.steps) + " steps, " + std::to_string(slipping) +
                  " slipping samples; max(|sigma_tau| - g) = " + fmt(excess) +
                  " (tol " + fmt(1e-8 * scale) + "), co-direction " + fmt(codir) +
                  " (tol 1e-8), " + fmt(r.seconds) + " s (limit 120)"};
}

Outcome energy() {
  const EnergyBalance b = energy_report(big_run().traj);
  double worst = 0, drop = 0;
  for (double r : b.residual)
    worst = std::max(worst, std::abs(r));
  for (std::size_t k = 1; k < b.dissipation.size(); ++k)
    drop = std::max(drop, b.dissipation[k - 1] - b.dissipation[k]);
  const bool ok = worst <= 1e-3 * b.max_energy && drop <= 0.0 && b.dissipation.back() > 0.0;
  return {ok, "max |residual| / max E = " + fmt(worst / b.max_energy) +
                  " (tol 1e-3), largest dissipation decrease " + fmt(drop) +
                  ", total dissipation " + fmt(b.dissipation.back())};
}

// Standing P and S waves across a locked fault, periodic in x, fixed at y = 0, 1.
struct PlaneWaveRun {
  double error = 0; ///< space-time relative L2 error
  SystemResidual residual;
};

PlaneWaveRun plane_wave(Index n) {
  const double h = 1.0 / double(n);
  const Grid grid = build_grid(n, n + 1, h, Vec2::Zero(), true);
  FaultTopology fault = embed_fault(grid, n / 2, n / 4, 3 * n / 4);
  const double rho = 1.0, lambda = 1.0, mu = 1.0;
  const double ws = 2.0 * pi * std::sqrt(mu / rho), wp = 2.0 * pi * std::sqrt((lambda + 2 * mu) / rho);
  Scenario s{Mesh(grid, std::move(fault)),
             MaterialField::uniform(grid, rho, lambda, mu),
             [](double, double) { return -1.0; },
             [](double, double) { return 1e6; }, // locked
             {}, {}, {}};
  s.half_window = 0.5;
  s.dt = 0.2 * h;
  s.steps = s.window_steps();
  s.c0 = 0.5;
  s.c1 = 0.4;
  s.normal = NormalCondition::NoOpening;
  s.snapshot_stride = 2;
  const double t0 = s.t_start();
  auto exact = [&](const Vec2& p, double t) {
    const double a = std::sin(2.0 * pi * p.y());
    return Eigen::Vector2d(0.3 * a * std::cos(ws * (t - t0)), 0.2 * a * std::cos(wp * (t - t0)));
  };
  s.u0.resize(2, s.mesh.node_count());
  for (Index k = 0; k < s.mesh.node_count(); ++k)
    s.u0.col(k) = exact(s.mesh.coord(k), t0);
  s.v0 = VectorField::Zero(2, s.mesh.node_count());
  const TrajectoryRecord traj = simulate(s);

  PlaneWaveRun out;
  double err = 0, ref = 0;
  SampledField u;
  for (Index id = 0; id < grid.base_count(); ++id)
    if (grid.row(id) >= 1 && grid.row(id) <= n - 1)
      u.nodes.push_back(id);
  // closing snapshot dropped if it breaks the stride
  std::size_t levels = traj.snapshot_steps.size();
  if (levels >= 2 && traj.snapshot_steps[levels - 1] - traj.snapshot_steps[levels - 2] != 2)
    --levels;
  u.values.resize(2 * u.node_count(), Index(levels));
  for (std::size_t k = 0; k < levels; ++k) {
    const double t = traj.time(traj.snapshot_steps[k]);
    u.times.push_back(t);
    const VectorField& uh = traj.snapshots[k];
    for (Index id = 0; id < grid.base_count(); ++id) {
      const Eigen::Vector2d e = exact(grid.coord(id), t);
      err += (uh.col(id) - e).squaredNorm();
      ref += e.squaredNorm();
    }
    for (std::size_t q = 0; q < u.nodes.size(); ++q)
      u.values.block<2, 1>(2 * Index(q), Index(k)) = uh.col(u.nodes[q]);
  }
  out.error = std::sqrt(err / ref);
  out.residual = system_residual(decompose(u, grid), grid, rho, lambda, mu, 2.0 * s.dt);
  return out;
}

Outcome convergence() {
  const PlaneWaveRun a = plane_wave(20), b = plane_wave(40), c = plane_wave(80);
  const double r1 = a.error / b.error, r2 = b.error / c.error;
  std::ofstream csv(out_dir / "plane_wave_residual.csv");
  write_residual_csv(csv, {{1.0 / 20, a.residual}, {1.0 / 40, b.residual}, {1.0 / 80, c.residual}});
  auto order = [](double x, double y) { return std::log2(x / y); };
  double worst_order = 1e300;
  for (auto [p, q] : {std::pair{a.residual, b.residual}, std::pair{b.residual, c.residual}})
    worst_order = std::min({worst_order, order(p.r_u, q.r_u), order(p.r_v, q.r_v), order(p.r_w, q.r_w)});
  const bool ok = r1 >= 3.5 && r2 >= 3.5 && worst_order >= 1.0;
  return {ok, "L2 errors " + fmt(a.error) + ", " + fmt(b.error) + ", " + fmt(c.error) +
                  " at 20/40/80 cells, ratios " + fmt(r1) + ", " + fmt(r2) +
                  " (min 3.5); lowest decomposition residual order " + fmt(worst_order) + " (min 1)"};
}

Outcome projection_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> trial(-2.0, 2.0), bound(1e-3, 1.0), imp(0.5, 2.0);
  constexpr int kPoints = 1000000;
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const double tau = trial(rng), g = bound(rng), z = imp(rng);
    // admissible tractions minimising the kinetic energy of the slip jump (tau - s)^2 / 2z
    double best = 0, best_energy = 1e300;
    for (int i = 0; i < kPoints; ++i) {
      const double s = -g + 2.0 * g * double(i) / double(kPoints - 1);
      const double e = (tau - s) * (tau - s);
      if (e < best_energy) {
        best_energy = e;
        best = s;
      }
    }
    const ProjectedTraction p = friction_projection(tau, g, z);
    worst = std::max({worst, std::abs(p.traction - best), z * std::abs(p.slip_rate - (tau - best) / z)});
  }
  return {worst <= 1e-6, "1000 inputs x 1e6-point scan, max deviation " + fmt(worst) + " (tol 1e-6)"};
}

Outcome lipschitz() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> cs(0.05, 1.0);
  double worst_ratio = 0, worst_fixed = 0, worst_unit = 0;
  auto run = [&](auto dim) {
    constexpr int m = decltype(dim)::value;
    using V = Eigen::Matrix<double, m, 1>;
    for (int k = 0; k < 100000; ++k) {
      const double c = cs(rng), scale = std::exp(2.0 * n(rng)) * c;
      V a, b;
      for (int i = 0; i < m; ++i) {
        a(i) = scale * n(rng);
        b(i) = scale * n(rng);
      }
      const V ra = lipschitz_direction(a, c), rb = lipschitz_direction(b, c);
      if ((a - b).norm() > 0)
        worst_ratio = std::max(worst_ratio, (ra - rb).norm() / ((2.0 / c) * (a - b).norm()));
      if (a.norm() >= c)
        worst_unit = std::max(worst_unit, std::abs(ra.norm() - 1.0));
      const V e = a.normalized();
      worst_fixed = std::max(worst_fixed, (lipschitz_direction(e, c) - e).norm());
    }
  };
  run(std::integral_constant<int, 1>{});
  run(std::integral_constant<int, 2>{});
  run(std::integral_constant<int, 3>{});
  const double eps = std::numeric_limits<double>::epsilon();
  const bool ok = worst_ratio <= 1.0 + 1e-12 && worst_fixed <= 4 * eps && worst_unit <= 4 * eps;
  return {ok, "1e5 pairs each for m = 1, 2, 3: max |rho(a) - rho(b)| / (2/c |a - b|) = " +
                  fmt(worst_ratio) + ", fixed-point defect " + fmt(worst_fixed) +
                  ", unit-magnitude defect " + fmt(worst_unit)};
}

Outcome adjoint() {
  RuptureSetup su;
  su.cells = 20;
  su.patch = {{0.1, 0.9, 0.72, 0.85}, {0.1, 0.9, 0.15, 0.28}};
  su.collar_r0 = 0.1;
  const Scenario sc = build_scenario(su);
  const RegionSet regions = build_regions(su, sc);
  const TrajectoryRecord traj = simulate(sc);
  const ObservationSet obs = record(traj, regions, su.patch);

  // the model of the continuation: N = M \ D with forcing on the cut
  const Mesh& mesh = sc.mesh;
  std::vector<char> active(std::size_t(mesh.node_count()), 0);
  for (Index k = 0; k < mesh.grid().base_count(); ++k)
    active[std::size_t(k)] = !regions.d_extension[k];
  const Index steps = 40;
  RegionWaveModel model(mesh, sc.material, active, {}, sc.dt, steps);
  {
    const auto& cut = model.cut_nodes();
    Eigen::SparseMatrix<double> b(2 * model.size(), 2 * Index(cut.size()));
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t k = 0; k < cut.size(); ++k)
      for (int c = 0; c < 2; ++c)
        t.emplace_back(2 * cut[k] + c, 2 * Index(k) + c, 1.0);
    b.setFromTriplets(t.begin(), t.end());
    model.set_forcing(std::move(b));
  }
  std::vector<Index> observed;
  for (Index id : obs.data.nodes)
    observed.push_back(model.local(id));
  const ObservedLeastSquares ls(model, observed, obs.data.values.leftCols(steps + 1));

  std::mt19937 rng(6);
  std::normal_distribution<double> n;
  auto random_controls = [&] {
    RegionWaveModel::Controls x = model.zero_controls();
    for (Index i = 0; i < x.u0.size(); ++i) {
      x.u0(i) = n(rng) * model.free_dofs()(i);
      x.v0(i) = n(rng) * model.free_dofs()(i);
    }
    for (Index i = 0; i < x.force.size(); ++i)
      x.force.data()[i] = n(rng);
    return x;
  };
  const double alpha = 1e-3;
  const RegionWaveModel::Controls x = random_controls();
  const RegionWaveModel::Controls g = ls.gradient(x, alpha);
  double worst = 0;
  for (int dir = 0; dir < 5; ++dir) {
    RegionWaveModel::Controls p = random_controls();
    p.scale(1.0 / std::sqrt(p.squared_norm()));
    const double step = 1e-4;
    RegionWaveModel::Controls xp = x, xm = x;
    xp.axpy(step, p);
    xm.axpy(-step, p);
    const double fd = (ls.objective(xp, alpha) - ls.objective(xm, alpha)) / (2 * step);
    const double an = g.dot(p);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)));
  }
  return {worst <= 1e-4, "20x20, 5 directions, max relative gradient error " + fmt(worst) + " (tol 1e-4)"};
}

// 100 x 100 default scenario shared by criteria 7 and 8
struct Reference {
  RuptureSetup setup;
  Scenario scenario;
  RegionSet regions;
  TrajectoryRecord traj;
  ObservationSet obs;
  double seconds = 0;
};

const Reference& reference() {
  static const Reference r = [] {
    const auto t0 = Clock::now();
    RuptureSetup su;
    su.cells = 100;
    Scenario sc = build_scenario(su);
    RegionSet regions = build_regions(su, sc);
    TrajectoryRecord traj = simulate(sc);
    ObservationSet obs = record(traj, regions, su.patch);
    return Reference{su, std::move(sc), std::move(regions), std::move(traj), std::move(obs),
                     seconds_since(t0)};
  }();
  return r;
}

void write_estimate(const FrictionEstimate& e, const std::string& name) {
  std::ofstream f(out_dir / name);
  write_estimate_csv(f, e);
}

Outcome closed_loop() {
  const Reference& r = reference();
  const FrictionEstimate e = recover(r.scenario, r.regions, r.obs, RecoveryMode::ClosedLoop, &r.traj);
  write_estimate(e, "estimate_closed-loop.csv");
  const bool ok = e.slipping && e.relative_error <= 0.05;
  return {ok, "100x100, relative L2 error " + fmt(e.relative_error) + " (tol 0.05), coverage " +
                  fmt(e.coverage)};
}

Outcome full_inverse() {
  const Reference& r = reference();
  const auto t0 = Clock::now();
  FrictionEstimate e;
  try {
    e = recover(r.scenario, r.regions, r.obs, RecoveryMode::FullInverse);
  } catch (const ContinuationError& err) {
    return {false, std::string("continuation did not converge: ") + err.what()};
  }
  const double seconds = r.seconds + seconds_since(t0);
  write_estimate(e, "estimate_full-inverse.csv");
  const bool ok = e.slipping && e.relative_error <= 0.15 && seconds <= 1200.0;
  return {ok, "100x100, relative L2 error " + fmt(e.relative_error) + " (tol 0.15), coverage " +
                  fmt(e.coverage) + ", continuation " + std::to_string(e.continuation.iterations) +
                  " iterations, traction " + std::to_string(e.traction_iterations) +
                  " iterations, " + fmt(seconds) + " s including the forward run (limit 1200)"};
}

constexpr Index kSweepCells = 32;

Outcome sweep() {
  RuptureSetup su;
  su.cells = kSweepCells;
  const Scenario sc = build_scenario(su);
  const RegionSet regions = build_regions(su, sc);
  const ObservationSet clean = record(simulate(sc), regions, su.patch);
  // eps0 is in discrete H2 units; the noise is rough, so its L2 size is only
  // about 2e-5 eps0 here against 0.2 for the data. Levels below e^-e barely
  // touch the data, so the ladder reaches up to where noise matters. The bound
  // overlay is evaluated where it is defined.
  const std::vector<double> levels{1e-2, 1e1, 1e2, 1e3};
  const StabilityCurve c = stability_sweep(sc, regions, clean, levels, {1, 2, 3, 4, 5});
  {
    std::ofstream f(out_dir / "stability.csv");
    write_curve_csv(f, c);
  }
  {
    std::ofstream f(out_dir / "stability.svg");
    write_curve_svg(f, c);
  }
  bool monotone = true, complete = true;
  std::string medians;
  for (std::size_t k = 0; k < c.rows.size(); ++k) {
    complete = complete && c.rows[k].seeds_used == 5 && std::isfinite(c.rows[k].median_error);
    if (k > 0)
      monotone = monotone && c.rows[k].median_error >= c.rows[k - 1].median_error;
    medians += (k ? ", " : "") + fmt(c.rows[k].median_error);
  }
  const bool overlay = std::isfinite(c.fitted_c) && fs::file_size(out_dir / "stability.svg") > 0;
  return {monotone && complete && overlay,
          std::to_string(kSweepCells) + "x" + std::to_string(kSweepCells) +
              ", 4 levels x 5 seeds, medians " + medians + (monotone ? " (non-decreasing)" : " (NOT monotone)") +
              ", fitted C " + fmt(c.fitted_c) + ", curve in stability.csv/.svg"};
}

Outcome determinism() {
  RuptureSetup su;
  su.cells = 24;
  auto forward_csv = [&] {
    const Scenario sc = build_scenario(su);
    const TrajectoryRecord traj = simulate(sc);
    std::ostringstream a, b;
    write_fault_csv(a, sc.mesh, traj.fault);
    write_energy_csv(b, energy_report(traj));
    return a.str() + b.str();
  };
  auto inverse_csv = [&] {
    const Scenario sc = build_scenario(su);
    const RegionSet regions = build_regions(su, sc);
    const ObservationSet obs =
        add_noise(sc.mesh.grid(), record(simulate(sc), regions, su.patch), 1e-3, 11);
    RecoveryOptions opt;
    opt.traction_iterations = 100;
    const FrictionEstimate e = recover(sc, regions, obs, RecoveryMode::FullInverse, nullptr, opt);
    std::ostringstream s;
    write_estimate_csv(s, e);
    return s.str();
  };
  const bool fwd = forward_csv() == forward_csv();
  const bool inv = inverse_csv() == inverse_csv();
  return {fwd && inv, std::string("forward fault/energy CSVs ") + (fwd ? "identical" : "DIFFER") +
                          ", noisy full-inverse estimate CSV (seed 11) " + (inv ? "identical" : "DIFFER")};
}

} // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit))
      only.insert(std::stoi(a));
    else
      out_dir = a;
  }
  fs::create_directories(out_dir);

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"friction complementarity", complementarity}},
      {2, {"energy audit", energy}},
      {3, {"convergence", convergence}},
      {4, {"projection oracle", projection_oracle}},
      {5, {"Lipschitz suite", lipschitz}},
      {6, {"adjoint correctness", adjoint}},
      {7, {"closed-loop recovery", closed_loop}},
      {8, {"full-inverse recovery", full_inverse}},
      {9, {"stability sweep", sweep}},
      {10, {"determinism", determinism}},
  };
  bool all = true;
  for (const auto& [id, c] : criteria) {
    if (!only.empty() && !only.count(id))
      continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << c.first << "): " << o.detail
              << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
