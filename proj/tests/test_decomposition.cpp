#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "tresca/decomposition.hpp"

using namespace tresca;
using std::numbers::pi;

namespace {

template <typename F>
SampledField sample(const Grid& g, Index i0, Index i1, Index j0, Index j1,
                    const std::vector<double>& times, F&& f) {
  SampledField s;
  for (Index j = j0; j <= j1; ++j)
    for (Index i = i0; i <= i1; ++i)
      s.nodes.push_back(g.id(i, j));
  s.times = times;
  s.values.resize(2 * s.node_count(), s.time_count());
  for (Index t = 0; t < s.time_count(); ++t)
    for (Index k = 0; k < s.node_count(); ++k)
      s.values.block<2, 1>(2 * k, t) = f(g.coord(s.nodes[std::size_t(k)]), times[std::size_t(t)]);
  return s;
}

} // namespace

TEST_CASE("div and curl of a linear field are exact") {
  const Grid g = build_grid(12, 12, 0.1, Vec2::Zero());
  Eigen::Matrix2d a;
  a << 0.4, -1.0, 2.0, 0.3;
  const SampledField u = sample(g, 1, 10, 1, 10, {0.0, 1.0}, [&](const Vec2& p, double t) {
    return Eigen::Vector2d((1.0 + t) * (a * p));
  });
  const DecomposedField d = decompose(u, g);
  CHECK(d.u.node_count() == 8 * 8); // the sample rim has no centred stencil
  for (Index t = 0; t < 2; ++t)
    for (Index k = 0; k < d.div.rows(); ++k) {
      CHECK(d.div(k, t) == doctest::Approx((1.0 + t) * a.trace()));
      CHECK(d.curl(k, t) == doctest::Approx((1.0 + t) * (a(1, 0) - a(0, 1))));
    }
}

TEST_CASE("decomposition refuses regions at the fault") {
  const Grid g = build_grid(12, 12, 0.1, Vec2::Zero());
  const FaultTopology f = embed_fault(g, 5, 3, 8);
  const auto zero = [](const Vec2&, double) { return Eigen::Vector2d::Zero().eval(); };
  CHECK_THROWS_AS(decompose(sample(g, 2, 9, 6, 9, {0.0}, zero), g, &f), InvalidArgument);
  CHECK_NOTHROW(decompose(sample(g, 2, 9, 7, 10, {0.0}, zero), g, &f));
  SampledField empty;
  CHECK_THROWS_AS(decompose(empty, g), InvalidArgument);
}

namespace {

// plane P wave plus plane S wave travelling along x
SystemResidual plane_wave_residual(Index cells, double lambda, double mu) {
  const double rho = 1.0, h = 1.0 / double(cells), dt = 0.5 * h;
  const double cp = std::sqrt((lambda + 2 * mu) / rho), cs = std::sqrt(mu / rho);
  const Grid g = build_grid(cells + 1, cells + 1, h, Vec2::Zero());
  std::vector<double> times;
  for (int k = 0; k <= 6; ++k)
    times.push_back(k * dt);
  const SampledField u = sample(g, 0, cells, 0, cells, times, [&](const Vec2& p, double t) {
    return Eigen::Vector2d(std::sin(2 * pi * (p.x() - cp * t)), 0.5 * std::cos(2 * pi * (p.x() - cs * t)));
  });
  const DecomposedField d = decompose(u, g);
  const CouplingFields c = CouplingFields::constant(lambda, mu);
  return system_residual(d, g, rho, lambda, mu, dt, &c);
}

} // namespace

TEST_CASE("exact plane waves leave second-order residuals") {
  for (auto [lambda, mu] : {std::pair{1.0, 1.0}, std::pair{2.5, 0.7}}) {
    const SystemResidual a = plane_wave_residual(16, lambda, mu);
    const SystemResidual b = plane_wave_residual(32, lambda, mu);
    CHECK(a.r_u / b.r_u > 3.0);
    CHECK(a.r_v / b.r_v > 3.0);
    CHECK(a.r_w / b.r_w > 3.0);
  }
}

TEST_CASE("dropping the coupling leaves an order-one residual") {
  const double lambda = 1.0, mu = 1.0, h = 1.0 / 24.0, dt = 0.5 * h;
  const double cp = std::sqrt(lambda + 2 * mu);
  const Grid g = build_grid(25, 25, h, Vec2::Zero());
  std::vector<double> times{0.0, dt, 2 * dt, 3 * dt};
  const SampledField u = sample(g, 0, 24, 0, 24, times, [&](const Vec2& p, double t) {
    return Eigen::Vector2d(std::sin(2 * pi * (p.x() - cp * t)), 0.0);
  });
  const DecomposedField d = decompose(u, g);
  const CouplingFields c = CouplingFields::constant(lambda, mu);
  const SystemResidual with = system_residual(d, g, 1.0, lambda, mu, dt, &c);
  CouplingFields none;
  none.bx = none.by = none.c = {Eigen::Matrix4d::Zero()};
  const SystemResidual without = system_residual(d, g, 1.0, lambda, mu, dt, &none);
  CHECK(without.r_u > 10.0 * with.r_u);
}

TEST_CASE("residual needs three time levels") {
  const Grid g = build_grid(8, 8, 0.1, Vec2::Zero());
  const SampledField u = sample(g, 0, 7, 0, 7, {0.0, 0.1}, [](const Vec2& p, double) {
    return Eigen::Vector2d(p.x(), p.y());
  });
  CHECK_THROWS_AS(system_residual(decompose(u, g), g, 1.0, 1.0, 1.0, 0.1), InvalidArgument);
}

TEST_CASE("residual CSV reports observed orders") {
  std::vector<ResidualLevel> levels{{0.5, {4.0, 8.0, 1.0}}, {0.25, {1.0, 2.0, 0.5}}};
  std::ostringstream os;
  write_residual_csv(os, levels);
  const std::string s = os.str();
  CHECK(s.rfind("h,r_u,r_v,r_w,order_u,order_v,order_w\n", 0) == 0);
  CHECK(s.find("\n0.5,4,8,1,,,\n") != std::string::npos);
  CHECK(s.find("\n0.25,1,2,0.5,2,2,1\n") != std::string::npos);
}

TEST_CASE("local averaging keeps affine fields and trims the rim") {
  const Grid g = build_grid(21, 21, 0.05, Vec2::Zero());
  std::vector<double> times;
  for (int k = 0; k < 30; ++k)
    times.push_back(0.01 * k);
  const auto affine = [](const Vec2& p, double t) {
    return Eigen::Vector2d(1.0 + 2.0 * p.x() - p.y() + 3.0 * t, -0.5 * p.x() + t);
  };
  const SampledField u = sample(g, 0, 20, 0, 20, times, affine);
  const SampledField m = mollify(u, g, 0.1); // two nodes, ten levels
  CHECK(m.node_count() == 17 * 17);
  CHECK(m.time_count() == 10);
  CHECK(m.times.front() == doctest::Approx(0.1));
  for (Index t = 0; t < m.time_count(); ++t)
    for (Index k = 0; k < m.node_count(); ++k) {
      const Eigen::Vector2d e = affine(g.coord(m.nodes[std::size_t(k)]), m.times[std::size_t(t)]);
      CHECK((m.values.block<2, 1>(2 * k, t) - e).norm() < 1e-12);
    }

  CHECK_THROWS_AS(mollify(u, g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(mollify(u, g, 1.0), InvalidArgument);
  SampledField uneven = u;
  uneven.times[3] += 0.001;
  CHECK_THROWS_AS(mollify(uneven, g, 0.1), InvalidArgument);
}

TEST_CASE("averaging commutes with the residual for constant coefficients") {
  // the residual of the averaged field equals the averaged residual, so a
  // field that solves the discrete system keeps solving it
  const Grid g = build_grid(41, 41, 0.025, Vec2::Zero());
  const double kx = 2.0 * pi, cs = 1.0;
  std::vector<double> times;
  for (int k = 0; k < 60; ++k)
    times.push_back(0.005 * k);
  const auto wave = [&](const Vec2& p, double t) {
    return Eigen::Vector2d(0.0, std::sin(kx * (p.x() - cs * t)));
  };
  const SampledField u = sample(g, 0, 40, 0, 40, times, wave);
  const SystemResidual raw = system_residual(decompose(u, g), g, 1.0, 1.0, 1.0, 0.005);
  const SystemResidual avg = system_residual(decompose(mollify(u, g, 0.1), g), g, 1.0, 1.0, 1.0, 0.005);
  const SystemResidual spatial = system_residual(decompose(mollify(u, g, 0.1), g), g, 0.0, 1.0, 1.0, 0.005);
  CHECK(avg.r_w < 0.01 * spatial.r_w);
  CHECK(avg.r_w < raw.r_w);
}
