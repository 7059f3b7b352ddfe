#include "tresca/decomposition.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "tresca/errors.hpp"

namespace tresca {

namespace {

class SlotMap {
public:
  SlotMap(const Grid& grid, const std::vector<Index>& nodes) : grid_(grid) {
    for (std::size_t k = 0; k < nodes.size(); ++k)
      slot_.emplace(nodes[k], Index(k));
  }
  Index at(Index id, Index di, Index dj) const {
    const Index j = grid_.row(id) + dj;
    Index i = grid_.col(id) + di;
    if (j < 0 || j >= grid_.ny)
      return -1;
    if (grid_.periodic_x)
      i = grid_.wrap(i);
    else if (i < 0 || i >= grid_.nx)
      return -1;
    const auto it = slot_.find(grid_.id(i, j));
    return it == slot_.end() ? -1 : it->second;
  }

private:
  const Grid& grid_;
  std::unordered_map<Index, Index> slot_;
};

// Slots of the 4 neighbours (+x, -x, +y, -y), or nothing if any is missing.
bool cross(const SlotMap& map, Index id, Index (&n)[4]) {
  n[0] = map.at(id, 1, 0);
  n[1] = map.at(id, -1, 0);
  n[2] = map.at(id, 0, 1);
  n[3] = map.at(id, 0, -1);
  return n[0] >= 0 && n[1] >= 0 && n[2] >= 0 && n[3] >= 0;
}

} // namespace

DecomposedField decompose(const SampledField& u, const Grid& grid, const FaultTopology* fault) {
  if (u.nodes.empty())
    throw InvalidArgument("decompose needs a non-empty region");
  if (fault)
    for (Index id : u.nodes)
      if (distance_to_fault(grid, *fault, grid.coord(id)) <= grid.h * (1.0 + 1e-9))
        throw InvalidArgument("decomposition region touches the fault");

  const SlotMap map(grid, u.nodes);
  std::vector<Index> keep, src;
  std::vector<std::array<Index, 4>> nb;
  for (std::size_t k = 0; k < u.nodes.size(); ++k) {
    Index n[4];
    if (cross(map, u.nodes[k], n)) {
      keep.push_back(u.nodes[k]);
      src.push_back(Index(k));
      nb.push_back({n[0], n[1], n[2], n[3]});
    }
  }
  const Index nt = u.time_count(), nn = Index(keep.size());
  DecomposedField d;
  d.u.nodes = keep;
  d.u.times = u.times;
  d.u.values.resize(2 * nn, nt);
  d.div.resize(nn, nt);
  d.curl.resize(nn, nt);
  const double inv2h = 0.5 / grid.h;
  for (Index t = 0; t < nt; ++t)
    for (Index k = 0; k < nn; ++k) {
      const auto& n = nb[std::size_t(k)];
      auto val = [&](Index s, int c) { return u.values(2 * s + c, t); };
      d.u.values(2 * k, t) = val(src[std::size_t(k)], 0);
      d.u.values(2 * k + 1, t) = val(src[std::size_t(k)], 1);
      const double uxx = (val(n[0], 0) - val(n[1], 0)) * inv2h;
      const double uyy = (val(n[2], 1) - val(n[3], 1)) * inv2h;
      const double uyx = (val(n[0], 1) - val(n[1], 1)) * inv2h;
      const double uxy = (val(n[2], 0) - val(n[3], 0)) * inv2h;
      d.div(k, t) = uxx + uyy;
      d.curl(k, t) = uyx - uxy;
    }
  return d;
}

namespace {

std::vector<double> cos2_weights(Index r) {
  std::vector<double> w;
  double sum = 0;
  for (Index d = -r; d <= r; ++d) {
    const double c = std::cos(0.5 * std::numbers::pi * double(d) / double(r + 1));
    w.push_back(c * c);
    sum += c * c;
  }
  for (double& x : w)
    x /= sum;
  return w;
}

// One spatial averaging pass along (di, dj) steps.
SampledField average_along(const SampledField& u, const Grid& grid, const std::vector<double>& w,
                           Index di, Index dj) {
  const Index r = Index(w.size() / 2);
  const SlotMap map(grid, u.nodes);
  SampledField out;
  out.times = u.times;
  std::vector<std::vector<Index>> stencils;
  for (Index id : u.nodes) {
    std::vector<Index> st;
    for (Index d = -r; d <= r; ++d) {
      const Index s = map.at(id, d * di, d * dj);
      if (s < 0)
        break;
      st.push_back(s);
    }
    if (Index(st.size()) == 2 * r + 1) {
      out.nodes.push_back(id);
      stencils.push_back(std::move(st));
    }
  }
  out.values.setZero(2 * out.node_count(), u.time_count());
  for (std::size_t k = 0; k < stencils.size(); ++k)
    for (std::size_t d = 0; d < w.size(); ++d)
      out.values.middleRows(2 * Index(k), 2) += w[d] * u.values.middleRows(2 * stencils[k][d], 2);
  return out;
}

} // namespace

SampledField mollify(const SampledField& u, const Grid& grid, double radius) {
  if (!(radius > 0.0))
    throw InvalidArgument("mollifier radius must be positive");
  const Index nt = u.time_count();
  if (nt < 2)
    throw InvalidArgument("mollify needs at least two time levels");
  const double tau = u.times[1] - u.times[0];
  for (Index t = 1; t < nt; ++t)
    if (std::abs(u.times[std::size_t(t)] - u.times[std::size_t(t - 1)] - tau) > 1e-9 * tau)
      throw InvalidArgument("mollify needs uniform time sampling");
  const Index rs = std::max<Index>(1, Index(std::lround(radius / grid.h)));
  const Index rt = std::max<Index>(1, Index(std::lround(radius / tau)));
  if (2 * rt + 1 > nt)
    throw InvalidArgument("mollifier radius exceeds the sampled time span");
  const std::vector<double> ws = cos2_weights(rs), wt = cos2_weights(rt);
  const SampledField sx = average_along(u, grid, ws, 1, 0);
  SampledField s = average_along(sx, grid, ws, 0, 1);
  SampledField out;
  out.nodes = std::move(s.nodes);
  const Index mt = nt - 2 * rt;
  out.times.assign(u.times.begin() + rt, u.times.begin() + rt + mt);
  out.values.setZero(s.values.rows(), mt);
  for (Index d = 0; d <= 2 * rt; ++d)
    out.values += wt[std::size_t(d)] * s.values.middleCols(d, mt);
  if (out.nodes.empty())
    throw InvalidArgument("mollifier radius leaves no interior nodes");
  return out;
}

CouplingFields CouplingFields::constant(double lambda, double mu) {
  CouplingFields c;
  Eigen::Matrix4d bx = Eigen::Matrix4d::Zero(), by = Eigen::Matrix4d::Zero();
  bx(0, 2) = -(lambda + mu) / mu;
  by(1, 2) = -(lambda + mu) / mu;
  c.bx = {bx};
  c.by = {by};
  c.c = {Eigen::Matrix4d::Zero()};
  return c;
}

SystemResidual system_residual(const DecomposedField& dec, const Grid& grid, double rho,
                               double lambda, double mu, double dt,
                               const CouplingFields* coupling) {
  const Index nt = dec.u.time_count();
  if (nt < 3)
    throw InvalidArgument("system residual needs at least three time levels");
  if (!(dt > 0.0))
    throw InvalidArgument("time step must be positive");
  const CouplingFields fallback = CouplingFields::constant(lambda, mu);
  const CouplingFields& cf = coupling ? *coupling : fallback;
  const Index nn = dec.u.node_count();
  auto pick = [&](const std::vector<Eigen::Matrix4d>& v, Index k) -> const Eigen::Matrix4d& {
    if (v.size() == 1)
      return v.front();
    if (Index(v.size()) != nn)
      throw InvalidArgument("coupling field size does not match the decomposed nodes");
    return v[std::size_t(k)];
  };

  const SlotMap map(grid, dec.u.nodes);
  const double h = grid.h, h2 = h * h, dt2 = dt * dt;
  double su = 0, sv = 0, sw = 0;
  for (Index k = 0; k < nn; ++k) {
    Index n[4];
    if (!cross(map, dec.u.nodes[std::size_t(k)], n))
      continue;
    const Eigen::Matrix4d& bx = pick(cf.bx, k);
    const Eigen::Matrix4d& by = pick(cf.by, k);
    const Eigen::Matrix4d& cc = pick(cf.c, k);
    for (Index t = 1; t + 1 < nt; ++t) {
      auto q = [&](Index s, Index tt) {
        return Eigen::Vector4d(dec.u.values(2 * s, tt), dec.u.values(2 * s + 1, tt),
                               dec.div(s, tt), dec.curl(s, tt));
      };
      const Eigen::Vector4d q0 = q(k, t);
      const Eigen::Vector4d qtt = (q(k, t + 1) - 2.0 * q0 + q(k, t - 1)) / dt2;
      const Eigen::Vector4d lap = (q(n[0], t) + q(n[1], t) + q(n[2], t) + q(n[3], t) - 4.0 * q0) / h2;
      const Eigen::Vector4d qx = (q(n[0], t) - q(n[1], t)) / (2.0 * h);
      const Eigen::Vector4d qy = (q(n[2], t) - q(n[3], t)) / (2.0 * h);
      const Eigen::Vector4d a = bx * qx + by * qy + cc * q0;
      const Eigen::Vector4d speed(rho / mu, rho / mu, rho / (lambda + 2.0 * mu), rho / mu);
      const Eigen::Vector4d r = speed.cwiseProduct(qtt) - lap + a;
      su += h2 * dt * r.head<2>().squaredNorm();
      sv += h2 * dt * r(2) * r(2);
      sw += h2 * dt * r(3) * r(3);
    }
  }
  return {std::sqrt(su), std::sqrt(sv), std::sqrt(sw)};
}

void write_residual_csv(std::ostream& os, const std::vector<ResidualLevel>& levels) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "h,r_u,r_v,r_w,order_u,order_v,order_w\n";
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& l = levels[k];
    buf << l.h << ',' << l.residual.r_u << ',' << l.residual.r_v << ',' << l.residual.r_w;
    if (k == 0) {
      buf << ",,,\n";
      continue;
    }
    const auto& p = levels[k - 1];
    const double lh = std::log(p.h / l.h);
    auto order = [&](double a, double b) {
      return (a > 0 && b > 0) ? std::log(a / b) / lh : std::nan("");
    };
    buf << ',' << order(p.residual.r_u, l.residual.r_u) << ','
        << order(p.residual.r_v, l.residual.r_v) << ',' << order(p.residual.r_w, l.residual.r_w)
        << '\n';
  }
  os << buf.str();
}

} // namespace tresca
