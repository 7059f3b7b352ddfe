#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tresca/continuation.hpp"
#include "tresca/setup.hpp"

using namespace tresca;

namespace {

RuptureSetup small_setup() {
  RuptureSetup s;
  s.cells = 20;
  s.patch = {{0.1, 0.9, 0.72, 0.85}, {0.1, 0.9, 0.15, 0.28}};
  s.collar_r0 = 0.1;
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

// N = M \ D with unit forcing on the nodes next to D, over `steps` steps
RegionWaveModel n_model(const Fixture& f, Index steps) {
  const Mesh& mesh = f.scenario.mesh;
  std::vector<char> active(std::size_t(mesh.node_count()), 0);
  for (Index k = 0; k < mesh.grid().base_count(); ++k)
    active[std::size_t(k)] = !f.regions.d_extension[k];
  RegionWaveModel m(mesh, f.scenario.material, active, {}, f.scenario.dt, steps);
  const auto& cut = m.cut_nodes();
  Eigen::SparseMatrix<double> b(2 * m.size(), 2 * Index(cut.size()));
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < cut.size(); ++k)
    for (int c = 0; c < 2; ++c)
      t.emplace_back(2 * cut[k] + c, 2 * Index(k) + c, 1.0);
  b.setFromTriplets(t.begin(), t.end());
  m.set_forcing(std::move(b));
  return m;
}

RegionWaveModel::Controls random_controls(const RegionWaveModel& m, std::mt19937& rng) {
  std::normal_distribution<double> n;
  RegionWaveModel::Controls x = m.zero_controls();
  for (Index i = 0; i < x.u0.size(); ++i) {
    x.u0(i) = n(rng) * m.free_dofs()(i);
    x.v0(i) = n(rng) * m.free_dofs()(i);
  }
  for (Index i = 0; i < x.force.size(); ++i)
    x.force.data()[i] = n(rng);
  return x;
}

std::vector<Index> patch_nodes(const Fixture& f, const RegionWaveModel& m) {
  std::vector<Index> out;
  for (Index id : f.obs.data.nodes)
    out.push_back(m.local(id));
  return out;
}

} // namespace

TEST_CASE("region model excludes D and flags the cut") {
  const Fixture& f = fixture();
  const RegionWaveModel m = n_model(f, 10);
  CHECK(m.size() == f.regions.n_complement.count());
  CHECK(!m.cut_nodes().empty());
  for (Index id : f.scenario.mesh.fault()->plus_ids)
    CHECK(m.local(id) < 0);
}

TEST_CASE("adjoint is the transpose of the forward map") {
  const Fixture& f = fixture();
  const RegionWaveModel m = n_model(f, 40);
  const std::vector<Index> observed = patch_nodes(f, m);
  const ObservedLeastSquares ls(m, observed, Eigen::MatrixXd::Zero(2 * Index(observed.size()), 41));
  std::mt19937 rng(17);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 3; ++trial) {
    const RegionWaveModel::Controls x = random_controls(m, rng);
    Eigen::MatrixXd r(2 * Index(observed.size()), 41);
    for (Index i = 0; i < r.size(); ++i)
      r.data()[i] = n(rng);
    const double lhs = (ls.apply(x).array() * r.array()).sum();
    const double rhs = x.dot(ls.apply_transpose(r));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("gradient matches central differences") {
  const Fixture& f = fixture();
  const RegionWaveModel m = n_model(f, 30);
  const std::vector<Index> observed = patch_nodes(f, m);
  std::mt19937 rng(23);
  std::normal_distribution<double> n;
  Eigen::MatrixXd d(2 * Index(observed.size()), 31);
  for (Index i = 0; i < d.size(); ++i)
    d.data()[i] = n(rng);
  const ObservedLeastSquares ls(m, observed, d);
  const double alpha = 1e-3;
  const RegionWaveModel::Controls x = random_controls(m, rng);
  const RegionWaveModel::Controls g = ls.gradient(x, alpha);
  for (int dir = 0; dir < 3; ++dir) {
    RegionWaveModel::Controls p = random_controls(m, rng);
    p.scale(1.0 / std::sqrt(p.squared_norm()));
    const double step = 1e-4;
    RegionWaveModel::Controls xp = x, xm = x;
    xp.axpy(step, p);
    xm.axpy(-step, p);
    const double fd = (ls.objective(xp, alpha) - ls.objective(xm, alpha)) / (2 * step);
    CHECK(std::abs(fd - g.dot(p)) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("CGLS decreases the objective and beats the zero field") {
  const Fixture& f = fixture();
  const RegionWaveModel m = n_model(f, 60);
  const std::vector<Index> observed = patch_nodes(f, m);
  std::mt19937 rng(29);
  const RegionWaveModel::Controls truth = random_controls(m, rng);
  const ObservedLeastSquares probe(m, observed, Eigen::MatrixXd::Zero(2 * Index(observed.size()), 61));
  Eigen::MatrixXd d = probe.apply(truth);
  for (Index k = 0; k < d.cols(); ++k)
    d.col(k) /= probe.weight(k); // data enter unweighted
  const ObservedLeastSquares ls(m, observed, d);
  const CglsResult r = cgls(ls, 1e-6, m.zero_controls(), 40, 1e-12);
  for (std::size_t k = 1; k < r.objective_history.size(); ++k)
    CHECK(r.objective_history[k] <= r.objective_history[k - 1] * (1 + 1e-12));
  CHECK(r.misfit <= ls.data().norm());
  CHECK(r.iterations == 40);
  CHECK_FALSE(r.converged);
}

TEST_CASE("continuation reports non-convergence instead of failing") {
  const Fixture& f = fixture();
  ContinuationProblem p;
  p.scenario = &f.scenario;
  p.obs = &f.obs;
  p.regions = &f.regions;
  p.alpha_ladder = {1e-3};
  p.max_iterations = 3;
  p.tolerance = 1e-14;
  const ReconstructedField rec = continue_wavefield(p);
  CHECK_FALSE(rec.converged);
  CHECK(rec.iterations == 3);
  CHECK(rec.data_misfit <= rec.zero_misfit);
  CHECK(rec.field.time_count() == Index(rec.steps.size()));
  CHECK(rec.field.times.front() >= -0.5 * f.scenario.half_window - 1e-12);
  CHECK(rec.field.times.back() <= 0.5 * f.scenario.half_window + 1e-12);

  std::ostringstream side;
  write_reconstruction_sidecar(side, rec);
  const auto j = nlohmann::json::parse(side.str());
  CHECK(j["converged"].get<bool>() == false);
  CHECK(j["alpha_ladder"].size() == 1);
}

TEST_CASE("continuation converges on its ladder and tracks the truth") {
  const Fixture& f = fixture();
  ContinuationProblem p;
  p.scenario = &f.scenario;
  p.obs = &f.obs;
  p.regions = &f.regions;
  p.alpha_ladder = {1e-2, 1e-4};
  p.max_iterations = 300;
  p.tolerance = 1e-3;
  const ReconstructedField rec = continue_wavefield(p);
  CHECK(rec.converged);
  CHECK(rec.data_misfit < 0.1 * rec.zero_misfit);
  CHECK(rec.ladder_misfit.back() <= rec.ladder_misfit.front());

  // the continued field should be far closer to the truth than zero is
  ReconstructedField zero = rec;
  zero.field.values.setZero();
  const Grid& g = f.scenario.mesh.grid();
  const CollarError e = collar_error(g, rec, f.traj, f.regions.n_delta_collar);
  const CollarError z = collar_error(g, zero, f.traj, f.regions.n_delta_collar);
  CHECK(e.collar < 0.2 * z.collar);
  CHECK(e.full < 0.3 * z.full);
}

TEST_CASE("continuation input checks") {
  const Fixture& f = fixture();
  ContinuationProblem p;
  CHECK_THROWS_AS(continue_wavefield(p), InvalidArgument);
  p.scenario = &f.scenario;
  p.obs = &f.obs;
  p.regions = &f.regions;
  p.window = 2.0 * f.scenario.half_window;
  CHECK_THROWS_AS(continue_wavefield(p), InvalidArgument);
  p.window = 0;
  p.alpha_ladder = {-1.0};
  CHECK_THROWS_AS(continue_wavefield(p), InvalidArgument);

  ObservationSet sparse = f.obs;
  sparse.steps[1] += 1;
  p.alpha_ladder = {};
  p.obs = &sparse;
  CHECK_THROWS_AS(continue_wavefield(p), InvalidArgument);
}

TEST_CASE("log-log bound") {
  CHECK(loglog_bound(1e-4, 1.0, 1.0) == doctest::Approx(1.0 / std::log(std::log(1e4))));
  CHECK(loglog_bound(1e-2, 2.0, 0.5) == doctest::Approx(2.0 / std::sqrt(std::log(std::log(100.0)))));
  double prev = 0;
  for (double e : {1e-12, 1e-8, 1e-4, 1e-2, 0.05}) {
    const double b = loglog_bound(e, 1.0, 1.0);
    CHECK(b > prev);
    prev = b;
  }
  CHECK_THROWS_AS(loglog_bound(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(loglog_bound(0.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(loglog_bound(-1e-3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(loglog_bound(1e-3, 0.0, 1.0), InvalidArgument);
}
