#include "tresca/solver.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace tresca {

FaultState FaultState::zeros(Index n) {
  FaultState s;
  s.normal_load = Eigen::VectorXd::Zero(n);
  s.normal_traction = Eigen::VectorXd::Zero(n);
  s.traction = Eigen::VectorXd::Zero(n);
  s.bound = Eigen::VectorXd::Zero(n);
  s.slip = Eigen::VectorXd::Zero(n);
  s.slip_rate = Eigen::VectorXd::Zero(n);
  s.mode.assign(std::size_t(n), SlipMode::Stick);
  return s;
}

bool TrajectoryRecord::has_step(Index k) const {
  return std::binary_search(snapshot_steps.begin(), snapshot_steps.end(), k);
}

const VectorField& TrajectoryRecord::at_step(Index k) const {
  auto it = std::lower_bound(snapshot_steps.begin(), snapshot_steps.end(), k);
  if (it == snapshot_steps.end() || *it != k)
    throw InvalidArgument("step " + std::to_string(k) + " was not recorded");
  return snapshots[std::size_t(it - snapshot_steps.begin())];
}

ForwardSolver::ForwardSolver(const Scenario& scenario)
    : scenario_(scenario), op_(scenario.mesh, scenario.material) {
  validate(scenario_);
  const FaultTopology& fault = *op_.mesh().fault();
  fault_x_.resize(fault.size());
  for (Index k = 0; k < fault.size(); ++k)
    fault_x_(k) = op_.mesh().coord(fault.plus_ids[std::size_t(k)]).x();
}

double ForwardSolver::impedance(Index k, double kick) const {
  const FaultTopology& fault = *op_.mesh().fault();
  const double mp = op_.mass()(fault.plus_ids[std::size_t(k)]);
  const double mm = op_.mass()(fault.minus_ids[std::size_t(k)]);
  return 1.0 / (kick * op_.fault_length() * (1.0 / mp + 1.0 / mm));
}

WavefieldState ForwardSolver::initial_state() const {
  WavefieldState s;
  s.u = scenario_.u0;
  s.velocity = scenario_.v0;
  for (Index k = 0; k < s.u.cols(); ++k)
    if (op_.mesh().is_boundary(k)) {
      s.u.col(k).setZero();
      s.velocity.col(k).setZero();
    }
  s.t = scenario_.t_start();
  s.step = 0;
  return s;
}

std::pair<WavefieldState, FaultState> ForwardSolver::step(const WavefieldState& state,
                                                          EnergyTerms* energy) const {
  const Scenario& sc = scenario_;
  const FaultTopology& fault = *op_.mesh().fault();
  const Index n = op_.mesh().node_count();
  const double dt = sc.dt;
  const double kick = state.step == 0 ? 0.5 * dt : dt;
  const double t = state.t;
  const double a = op_.fault_length();

  VectorField f = op_.internal_force(state.u);
  VectorField f_ext = VectorField::Zero(2, n);
  if (sc.source.active())
    f_ext = sc.source.amplitude(t) * sc.source.nodal_force;
  f += f_ext;

  WavefieldState next;
  next.velocity.resize(2, n);
  {
    const Eigen::Map<const Eigen::ArrayXd> fv(f.data(), f.size());
    const Eigen::Map<const Eigen::ArrayXd> v(state.velocity.data(), state.velocity.size());
    Eigen::Map<Eigen::ArrayXd> vn(next.velocity.data(), next.velocity.size());
    const Eigen::ArrayXd& free = op_.free_dofs().array();
    for (Index k = 0; k < n; ++k) {
      const double s = kick / op_.mass()(k);
      vn.segment<2>(2 * k) = (v.segment<2>(2 * k) + s * fv.segment<2>(2 * k)) * free.segment<2>(2 * k);
    }
  }

  FaultState fs = FaultState::zeros(fault.size());
  fs.t = t;
  for (Index k = 0; k < fault.size(); ++k) {
    const Index p = fault.plus_ids[std::size_t(k)], m = fault.minus_ids[std::size_t(k)];
    const double mp = op_.mass()(p), mm = op_.mass()(m);
    const double inv = 1.0 / mp + 1.0 / mm;
    const Eigen::Vector2d jump_old = state.velocity.col(p) - state.velocity.col(m);
    const Eigen::Vector2d trial =
        (jump_old / kick + f.col(p) / mp - f.col(m) / mm) / (a * inv);
    const double z = 1.0 / (kick * a * inv);

    const double x = fault_x_(k);
    const double fn = sc.normal_traction(x, t);
    const double g = sc.friction_coefficient(x, t) * std::abs(fn);
    const ProjectedTraction pr = friction_projection(trial.dot(fault.tangent), g, z);
    const double sn =
        sc.normal == NormalCondition::PrescribedTraction ? fn : trial.dot(fault.normal);
    const Eigen::Vector2d traction = sn * fault.normal + pr.traction * fault.tangent;

    next.velocity.col(p) = state.velocity.col(p) + kick * (f.col(p) - a * traction) / mp;
    next.velocity.col(m) = state.velocity.col(m) + kick * (f.col(m) + a * traction) / mm;

    fs.normal_load(k) = fn;
    fs.normal_traction(k) = sn;
    fs.traction(k) = pr.traction;
    fs.bound(k) = g;
    fs.slip_rate(k) = (next.velocity.col(p) - next.velocity.col(m)).dot(fault.tangent);
    fs.mode[std::size_t(k)] = pr.slipping ? SlipMode::Slip : SlipMode::Stick;

    const Eigen::Vector2d normal_force = a * sn * fault.normal;
    f_ext.col(p) -= normal_force;
    f_ext.col(m) += normal_force;
  }

  next.u = state.u + dt * next.velocity;
  next.t = t + dt;
  next.step = state.step + 1;
  if (!next.u.allFinite())
    throw DivergenceError(long(state.step), "non-finite displacement");

  for (Index k = 0; k < fault.size(); ++k)
    fs.slip(k) = (next.u.col(fault.plus_ids[std::size_t(k)]) -
                  next.u.col(fault.minus_ids[std::size_t(k)]))
                     .dot(fault.tangent);

  if (energy) {
    double kin = 0;
    for (Index k = 0; k < n; ++k)
      kin += op_.mass()(k) * next.velocity.col(k).squaredNorm();
    energy->kinetic = 0.5 * kin;
    // 1/2 u_k' K u_{k+1}; f still holds -K u_k + source
    double strain = -0.5 * f.cwiseProduct(next.u).sum();
    if (sc.source.active())
      strain += 0.5 * sc.source.amplitude(t) * sc.source.nodal_force.cwiseProduct(next.u).sum();
    energy->strain = strain;
    energy->balance_defined = state.step > 0;
    if (energy->balance_defined) {
      const VectorField u_prev = state.u - dt * state.velocity;
      energy->work = 0.5 * f_ext.cwiseProduct(next.u - u_prev).sum();
    }
    energy->dissipation = a * (fs.bound.array() * fs.slip_rate.array().abs()).sum() * dt;
  }
  return {std::move(next), std::move(fs)};
}

namespace {

// Lumped L2 and cell-gradient H1 seminorm (squared), fault-aware.
std::pair<double, double> spatial_sq(const ElasticOperator& op, const VectorField& u) {
  double l2 = 0;
  for (Index k = 0; k < u.cols(); ++k)
    l2 += op.area()(k) * u.col(k).squaredNorm();
  const double h = op.mesh().grid().h;
  double d1 = 0;
  for (Index e = 0; e < op.mesh().element_count(); ++e) {
    const auto nd = op.mesh().element_nodes(e);
    const Eigen::Vector2d dx = 0.5 * ((u.col(nd[1]) + u.col(nd[2])) - (u.col(nd[0]) + u.col(nd[3]))) / h;
    const Eigen::Vector2d dy = 0.5 * ((u.col(nd[2]) + u.col(nd[3])) - (u.col(nd[0]) + u.col(nd[1]))) / h;
    d1 += h * h * (dx.squaredNorm() + dy.squaredNorm());
  }
  return {l2, d1};
}

struct EnergyClassAccumulator {
  double sup_h1 = 0, sup_l2 = 0;
  void add(const ElasticOperator& op, const VectorField& u, const VectorField& v,
           const VectorField& acc) {
    const auto [ul2, ud1] = spatial_sq(op, u);
    const auto [vl2, vd1] = spatial_sq(op, v);
    double al2 = 0;
    for (Index k = 0; k < acc.cols(); ++k)
      al2 += op.area()(k) * acc.col(k).squaredNorm();
    sup_h1 = std::max(sup_h1, std::sqrt(ul2 + ud1) + std::sqrt(vl2 + vd1));
    sup_l2 = std::max(sup_l2, std::sqrt(ul2) + std::sqrt(vl2) + std::sqrt(al2));
  }
  double value() const { return sup_h1 + sup_l2; }
};

} // namespace

TrajectoryRecord ForwardSolver::simulate() const {
  const Scenario& sc = scenario_;
  TrajectoryRecord rec;
  rec.t_start = sc.t_start();
  rec.dt = sc.dt;
  rec.steps = sc.steps;
  rec.stride = sc.snapshot_stride;
  rec.compatibility = check_compatibility(op_, sc);
  rec.fault.reserve(std::size_t(sc.steps));
  rec.energy.reserve(std::size_t(sc.steps));

  WavefieldState state = initial_state();
  EnergyClassAccumulator norm;
  if (sc.steps == 0)
    norm.add(op_, state.u, state.velocity, VectorField::Zero(2, state.u.cols()));

  for (Index k = 0; k < sc.steps; ++k) {
    if (k % sc.snapshot_stride == 0) {
      rec.snapshot_steps.push_back(k);
      rec.snapshots.push_back(state.u);
    }
    EnergyTerms et;
    auto [next, fs] = step(state, &et);
    if (k % sc.snapshot_stride == 0) {
      const double c = k == 0 ? 0.5 * sc.dt : sc.dt;
      const VectorField v_mid = k == 0 ? state.velocity : VectorField(0.5 * (state.velocity + next.velocity));
      norm.add(op_, state.u, v_mid, (next.velocity - state.velocity) / c);
    }
    rec.fault.push_back(std::move(fs));
    rec.energy.push_back(et);
    state = std::move(next);
  }
  if (rec.snapshot_steps.empty() || rec.snapshot_steps.back() != sc.steps) {
    rec.snapshot_steps.push_back(sc.steps);
    rec.snapshots.push_back(state.u);
  }
  rec.lambda0 = norm.value();
  return rec;
}

TrajectoryRecord simulate(const Scenario& scenario) { return ForwardSolver(scenario).simulate(); }

EnergyBalance energy_report(const TrajectoryRecord& traj) {
  EnergyBalance e;
  double e0 = 0, w = 0, d = 0;
  bool started = false;
  for (std::size_t k = 0; k < traj.energy.size(); ++k) {
    const EnergyTerms& et = traj.energy[k];
    const double total = et.kinetic + et.strain;
    if (!et.balance_defined) {
      e0 = total;
      started = true;
    } else {
      w += et.work;
      d += et.dissipation;
    }
    if (!started) {
      e0 = total;
      started = true;
    }
    e.time.push_back(traj.time(Index(k)) + 0.5 * traj.dt);
    e.kinetic.push_back(et.kinetic);
    e.strain.push_back(et.strain);
    e.work.push_back(w);
    e.dissipation.push_back(d);
    e.residual.push_back(total - e0 + d - w);
    e.max_energy = std::max(e.max_energy, std::abs(total));
  }
  return e;
}

ComplementarityReport check_complementarity(const std::vector<FaultState>& history,
                                            double scale, double tol) {
  ComplementarityReport r;
  double rate_scale = 1.0;
  for (const FaultState& fs : history)
    if (fs.slip_rate.size() > 0)
      rate_scale = std::max(rate_scale, fs.slip_rate.cwiseAbs().maxCoeff());
  double worst = 0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const FaultState& fs = history[k];
    for (Index i = 0; i < fs.traction.size(); ++i) {
      const double tau = fs.traction(i), g = fs.bound(i), s = fs.slip_rate(i);
      const double excess = std::abs(tau) - g;
      const double codir = std::abs(tau * s - g * std::abs(s));
      r.max_bound_excess = std::max(r.max_bound_excess, excess);
      r.max_codirection = std::max(r.max_codirection, codir / (g * std::abs(s) + scale));
      if (fs.mode[std::size_t(i)] == SlipMode::Stick)
        r.max_stick_rate = std::max(r.max_stick_rate, std::abs(s));
      const double badness = std::max({excess / scale, codir / (g * std::abs(s) + scale)});
      if (badness > worst) {
        worst = badness;
        r.worst_step = Index(k);
        r.worst_node = i;
      }
    }
  }
  r.passed = r.max_bound_excess <= tol * scale && r.max_codirection <= tol &&
             r.max_stick_rate <= tol * rate_scale;
  return r;
}

double variational_inequality_lhs(const ForwardSolver& solver, const TrajectoryRecord& traj,
                                  Index k, const VectorField& w) {
  if (k < 1 || k + 1 > traj.steps)
    throw InvalidArgument("variational inequality needs 1 <= k < steps");
  const ElasticOperator& op = solver.op();
  const Scenario& sc = solver.scenario();
  const FaultTopology& fault = *op.mesh().fault();
  const double dt = traj.dt, a = op.fault_length();
  const VectorField& um = traj.at_step(k - 1);
  const VectorField& u = traj.at_step(k);
  const VectorField& up = traj.at_step(k + 1);

  const VectorField udot = (up - u) / dt;
  VectorField test = w - udot;
  for (Index n = 0; n < test.cols(); ++n)
    test.col(n) *= op.free_dofs()(2 * n);

  VectorField r = op.internal_force(u) * -1.0;
  for (Index n = 0; n < r.cols(); ++n)
    r.col(n) += op.mass()(n) * (up.col(n) - 2.0 * u.col(n) + um.col(n)) / (dt * dt);
  if (sc.source.active())
    r -= sc.source.amplitude(traj.time(k)) * sc.source.nodal_force;
  double lhs = test.cwiseProduct(r).sum();

  const FaultState& fs = traj.fault[std::size_t(k)];
  for (Index i = 0; i < fault.size(); ++i) {
    const Index p = fault.plus_ids[std::size_t(i)], m = fault.minus_ids[std::size_t(i)];
    const Eigen::Vector2d jw = w.col(p) - w.col(m);
    const Eigen::Vector2d ju = udot.col(p) - udot.col(m);
    const Eigen::Vector2d jt = test.col(p) - test.col(m);
    lhs += a * fs.bound(i) * std::abs(jw.dot(fault.tangent));
    lhs -= a * fs.bound(i) * std::abs(ju.dot(fault.tangent));
    lhs += a * fs.normal_traction(i) * jt.dot(fault.normal);
  }
  return lhs;
}

void write_fault_csv(std::ostream& os, const Mesh& mesh, const std::vector<FaultState>& history) {
  const FaultTopology& fault = *mesh.fault();
  std::ostringstream buf;
  buf.precision(17);
  buf << "t,x,F_n,sigma_tau,g,slip,slip_rate,mode\n";
  for (const FaultState& fs : history)
    for (Index k = 0; k < fault.size(); ++k)
      buf << fs.t << ',' << mesh.coord(fault.plus_ids[std::size_t(k)]).x() << ','
          << fs.normal_load(k) << ',' << fs.traction(k) << ',' << fs.bound(k) << ','
          << fs.slip(k) << ',' << fs.slip_rate(k) << ','
          << (fs.mode[std::size_t(k)] == SlipMode::Slip ? "slip" : "stick") << '\n';
  os << buf.str();
}

std::vector<FaultState> read_fault_csv(std::istream& is, Index fault_nodes) {
  std::vector<FaultState> out;
  std::string line;
  if (!std::getline(is, line))
    throw InvalidArgument("empty fault history");
  Index row = 0;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string cell[8];
    for (auto& c : cell)
      if (!std::getline(ls, c, ','))
        throw InvalidArgument("fault history line " + std::to_string(line_no) +
                              ": expected 8 fields");
    const Index k = row % fault_nodes;
    if (k == 0) {
      out.push_back(FaultState::zeros(fault_nodes));
      out.back().t = std::stod(cell[0]);
    }
    FaultState& fs = out.back();
    try {
      fs.normal_load(k) = std::stod(cell[2]);
      fs.normal_traction(k) = fs.normal_load(k);
      fs.traction(k) = std::stod(cell[3]);
      fs.bound(k) = std::stod(cell[4]);
      fs.slip(k) = std::stod(cell[5]);
      fs.slip_rate(k) = std::stod(cell[6]);
    } catch (const std::exception&) {
      throw InvalidArgument("fault history line " + std::to_string(line_no) + ": bad number");
    }
    fs.mode[std::size_t(k)] = cell[7] == "slip" ? SlipMode::Slip : SlipMode::Stick;
    ++row;
  }
  if (row % fault_nodes != 0)
    throw InvalidArgument("fault history has a partial time level");
  return out;
}

void write_energy_csv(std::ostream& os, const EnergyBalance& e) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "t,kinetic,strain,external_work,dissipation,residual\n";
  for (std::size_t k = 0; k < e.time.size(); ++k)
    buf << e.time[k] << ',' << e.kinetic[k] << ',' << e.strain[k] << ',' << e.work[k] << ','
        << e.dissipation[k] << ',' << e.residual[k] << '\n';
  os << buf.str();
}

} // namespace tresca
