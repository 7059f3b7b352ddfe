#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tresca/recovery.hpp"
#include "tresca/setup.hpp"

using namespace tresca;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RuptureSetup small_setup() {
  RuptureSetup s;
  s.cells = 24; // default patches and collar
  return s;
}

struct Fixture {
  RuptureSetup setup;
  Scenario scenario;
  RegionSet regions;
  TrajectoryRecord traj;
  ObservationSet obs;

  Fixture()
      : setup(small_setup()), scenario(build_scenario(setup)),
        regions(build_regions(setup, scenario)), traj(simulate(scenario)),
        obs(record(traj, regions, setup.patch)) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

} // namespace

TEST_CASE("Lipschitz direction map") {
  CHECK(lipschitz_direction(3.0, 1.0) == 1.0);
  CHECK(lipschitz_direction(-0.25, 0.5) == -0.5);
  CHECK_THROWS_AS(lipschitz_direction(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(lipschitz_direction(Eigen::Vector2d(1.0, 0.0), -1.0), InvalidArgument);

  std::mt19937 rng(31);
  std::normal_distribution<double> n(0.0, 2.0);
  const double c = 0.3;
  auto run = [&](auto dim) {
    constexpr int m = decltype(dim)::value;
    using V = Eigen::Matrix<double, m, 1>;
    for (int k = 0; k < 2000; ++k) {
      V a, b;
      for (int i = 0; i < m; ++i) {
        a(i) = n(rng);
        b(i) = n(rng);
      }
      const V ra = lipschitz_direction(a, c), rb = lipschitz_direction(b, c);
      CHECK(ra.norm() <= 1.0 + 1e-15);
      if (a.norm() >= c)
        CHECK((ra - a.normalized()).norm() < 1e-14);
      CHECK((ra - rb).norm() <= (2.0 / c) * (a - b).norm() * (1 + 1e-12));
    }
  };
  run(std::integral_constant<int, 1>{});
  run(std::integral_constant<int, 2>{});
  run(std::integral_constant<int, 3>{});
}

TEST_CASE("friction ratio is defined only where the normal traction is bounded away from zero") {
  Eigen::MatrixXd g(2, 2), sn(2, 2);
  g << 0.3, kNaN, 0.2, 0.4;
  sn << -1.0, -1.0, -0.1, 2.0;
  const Eigen::MatrixXd f = friction_coefficient(g, sn, 0.5);
  CHECK(f(0, 0) == doctest::Approx(0.3));
  CHECK(std::isnan(f(0, 1)));
  CHECK(std::isnan(f(1, 0)));
  CHECK(f(1, 1) == doctest::Approx(0.2));
  CHECK_THROWS_AS(friction_coefficient(g, sn, 0.0), InvalidArgument);
  CHECK_THROWS_AS(friction_coefficient(g, Eigen::MatrixXd(3, 2), 0.5), InvalidArgument);
}

TEST_CASE("friction bound flags co-direction violations") {
  FaultTraceSeries tr;
  tr.c1 = 0.1;
  tr.sigma_tau.resize(1, 3);
  tr.jump_rate.resize(1, 3);
  tr.valid.resize(1, 3);
  tr.sigma_tau << 0.5, -0.5, 0.5;
  tr.jump_rate << 1.0, 2.0, 0.01;
  tr.valid << 1, 1, 0;
  const FrictionBound b = friction_bound(tr);
  CHECK(b.g(0, 0) == 0.5);
  CHECK(b.g(0, 1) == 0.5);
  CHECK(std::isnan(b.g(0, 2)));
  CHECK(b.inconsistent(0, 1) == 1);
  CHECK(b.inconsistent_count == 1);
}

TEST_CASE("closed loop reproduces the friction coefficient") {
  const Fixture& f = fixture();
  const FrictionEstimate e = recover(f.scenario, f.regions, f.obs, RecoveryMode::ClosedLoop, &f.traj);
  REQUIRE(e.slipping);
  CHECK(e.outcome == "ok");
  CHECK(e.relative_error < 1e-10);
  CHECK(e.coverage > 0.1);
  CHECK(e.inconsistent == 0);
  for (Index c = 0; c < e.f_hat.cols(); ++c)
    for (Index i = 0; i < e.f_hat.rows(); ++i) {
      if (e.trace.valid(i, c))
        CHECK(std::abs(e.trace.jump_rate(i, c)) >= f.scenario.c1);
      if (!std::isnan(e.f_hat(i, c))) {
        CHECK(e.trace.valid(i, c));
        CHECK(e.f_hat(i, c) >= 0.0);
      }
    }
  for (double t : e.trace.times) {
    CHECK(t >= -0.5 * f.scenario.half_window - 1e-12);
    CHECK(t <= 0.5 * f.scenario.half_window + 1e-12);
  }
  CHECK_THROWS_AS(recover(f.scenario, f.regions, f.obs, RecoveryMode::ClosedLoop), InvalidArgument);
}

TEST_CASE("closed loop with a high threshold finds no slipping region") {
  const Fixture& f = fixture();
  Scenario s = f.scenario;
  s.c1 = 1e6;
  const FrictionEstimate e = recover(s, f.regions, f.obs, RecoveryMode::ClosedLoop, &f.traj);
  CHECK_FALSE(e.slipping);
  CHECK(e.outcome == "no slipping region");
  CHECK(std::isnan(e.relative_error));
}

TEST_CASE("trace window must lie inside the field") {
  const Fixture& f = fixture();
  const ElasticOperator op(f.scenario.mesh, f.scenario.material);
  const FieldHistory h = FieldHistory::of(f.traj);
  CHECK_THROWS_AS(fault_trace(op, f.scenario.source, h, -f.scenario.half_window, 0.0, 0.1),
                  InvalidArgument);
  CHECK_NOTHROW(fault_trace(op, f.scenario.source, h, -0.5, 0.5, 0.1));
}

TEST_CASE("full inverse recovers the coefficient on a coarse grid") {
  const Fixture& f = fixture();
  RecoveryOptions opt;
  opt.continuation.alpha_ladder = {1e-2, 1e-4};
  opt.continuation.max_iterations = 300;
  opt.continuation.tolerance = 1e-3;
  opt.traction_iterations = 600;
  const FrictionEstimate e = recover(f.scenario, f.regions, f.obs, RecoveryMode::FullInverse, nullptr, opt);
  CHECK(e.continuation.converged);
  REQUIRE(e.slipping);
  CHECK(e.relative_error < 0.3);
  CHECK(e.traction_iterations > 0);
}

TEST_CASE("unconverged continuation is an error unless accepted") {
  const Fixture& f = fixture();
  RecoveryOptions opt;
  opt.continuation.alpha_ladder = {1e-4};
  opt.continuation.max_iterations = 2;
  opt.continuation.tolerance = 1e-12;
  opt.traction_iterations = 5;
  try {
    (void)recover(f.scenario, f.regions, f.obs, RecoveryMode::FullInverse, nullptr, opt);
    FAIL("expected a continuation error");
  } catch (const ContinuationError& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(e.best().iterations == 2);
  }
  opt.accept_unconverged = true;
  CHECK_NOTHROW(recover(f.scenario, f.regions, f.obs, RecoveryMode::FullInverse, nullptr, opt));
}

TEST_CASE("sweep input checks and curve output") {
  const Fixture& f = fixture();
  CHECK_THROWS_AS(stability_sweep(f.scenario, f.regions, f.obs, {1e-2, 1e-3}, {1}), InvalidArgument);
  CHECK_THROWS_AS(stability_sweep(f.scenario, f.regions, f.obs, {}, {1}), InvalidArgument);
  CHECK_THROWS_AS(stability_sweep(f.scenario, f.regions, f.obs, {1e-3}, {}), InvalidArgument);

  StabilityCurve c;
  c.rows.push_back({1e-3, 0.1, 0.2, 5});
  c.rows.push_back({1e-2, kNaN, kNaN, 0});
  std::ostringstream os;
  write_curve_csv(os, c);
  CHECK(os.str() == "eps0,median_error,loglog_bound,seeds_used\n0.001,0.10000000000000001,"
                    "0.20000000000000001,5\n0.01,,,0\n");
}

TEST_CASE("estimate CSV has one row per fault sample") {
  const Fixture& f = fixture();
  const FrictionEstimate e = recover(f.scenario, f.regions, f.obs, RecoveryMode::ClosedLoop, &f.traj);
  std::ostringstream os;
  write_estimate_csv(os, e);
  const std::string s = os.str();
  CHECK(s.rfind("t,x,sigma_n,sigma_tau,jump_rate,valid,g_hat,F_hat,F_true\n", 0) == 0);
  const auto rows = std::count(s.begin(), s.end(), '\n') - 1;
  CHECK(rows == Index(e.trace.x.size() * e.trace.times.size()));
}
