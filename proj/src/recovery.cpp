#include "tresca/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <ostream>
#include <sstream>

#include "tresca/plot.hpp"

namespace tresca {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

FieldHistory FieldHistory::of(const TrajectoryRecord& traj) {
  FieldHistory f;
  f.at = [&traj](Index k) -> const VectorField& { return traj.at_step(k); };
  f.first = traj.snapshot_steps.empty() ? 0 : traj.snapshot_steps.front();
  f.last = traj.snapshot_steps.empty() ? -1 : traj.snapshot_steps.back();
  f.t_start = traj.t_start;
  f.dt = traj.dt;
  return f;
}

double FaultTraceSeries::coverage() const {
  if (valid.size() == 0)
    return 0.0;
  return double(valid.cast<int>().sum()) / double(valid.size());
}

FaultTraceSeries fault_trace(const ElasticOperator& op, const BodySource& source,
                             const FieldHistory& field, double t0, double t1, double c1) {
  const Mesh& mesh = op.mesh();
  if (!mesh.has_fault())
    throw InvalidArgument("fault_trace needs a mesh with a fault");
  if (!(field.dt > 0.0))
    throw InvalidArgument("fault_trace needs a positive time step");
  const FaultTopology& fault = *mesh.fault();
  const double dt = field.dt, a = op.fault_length();
  const Index k0 = Index(std::ceil((t0 - field.t_start) / dt - 1e-9));
  const Index k1 = Index(std::floor((t1 - field.t_start) / dt + 1e-9));
  if (k1 < k0 || k0 - 1 < field.first || k1 + 1 > field.last)
    throw InvalidArgument("trace window exceeds the field span");

  FaultTraceSeries tr;
  tr.c1 = c1;
  const Index nf = fault.size(), nt = k1 - k0 + 1;
  for (Index id : fault.plus_ids)
    tr.x.push_back(mesh.coord(id).x());
  tr.sigma_n.resize(nf, nt);
  tr.sigma_tau.resize(nf, nt);
  tr.jump_rate.resize(nf, nt);
  tr.valid.resize(nf, nt);

  const SparseMatrix& k = op.stiffness();
  auto internal = [&](const VectorField& u, Index node) {
    const Eigen::Map<const Eigen::VectorXd> flat(u.data(), u.size());
    return Eigen::Vector2d(-k.row(2 * node).dot(flat), -k.row(2 * node + 1).dot(flat));
  };
  for (Index c = 0; c < nt; ++c) {
    const Index step = k0 + c;
    const double t = field.time(step);
    tr.steps.push_back(step);
    tr.times.push_back(t);
    const VectorField& um = field.at(step - 1);
    const VectorField& u = field.at(step);
    const VectorField& up = field.at(step + 1);
    const double amp = source.active() ? source.amplitude(t) : 0.0;
    for (Index i = 0; i < nf; ++i) {
      const Index p = fault.plus_ids[std::size_t(i)], m = fault.minus_ids[std::size_t(i)];
      Eigen::Vector2d fp = internal(u, p), fm = internal(u, m);
      if (amp != 0.0) {
        fp += amp * source.nodal_force.col(p);
        fm += amp * source.nodal_force.col(m);
      }
      const Eigen::Vector2d ap = (up.col(p) - 2.0 * u.col(p) + um.col(p)) / (dt * dt);
      const Eigen::Vector2d am = (up.col(m) - 2.0 * u.col(m) + um.col(m)) / (dt * dt);
      const Eigen::Vector2d tp = (fp - op.mass()(p) * ap) / a;
      const Eigen::Vector2d tm = (op.mass()(m) * am - fm) / a;
      const TractionParts<double> parts = split_traction(0.5 * (tp + tm), fault.normal);
      tr.sigma_n(i, c) = parts.normal;
      tr.sigma_tau(i, c) = parts.tangential.dot(fault.tangent);
      const double jp = (up.col(p) - up.col(m)).dot(fault.tangent);
      const double jm = (um.col(p) - um.col(m)).dot(fault.tangent);
      tr.jump_rate(i, c) = (jp - jm) / (2.0 * dt);
      tr.valid(i, c) = std::abs(tr.jump_rate(i, c)) >= c1 ? 1 : 0;
    }
  }
  return tr;
}

FrictionBound friction_bound(const FaultTraceSeries& trace) {
  FrictionBound b;
  const Index nf = trace.sigma_tau.rows(), nt = trace.sigma_tau.cols();
  b.g = Eigen::MatrixXd::Constant(nf, nt, kNaN);
  b.inconsistent = Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(nf, nt);
  for (Index c = 0; c < nt; ++c)
    for (Index i = 0; i < nf; ++i) {
      if (!trace.valid(i, c))
        continue;
      const double tau = trace.sigma_tau(i, c), s = trace.jump_rate(i, c);
      b.g(i, c) = std::abs(tau);
      // the slip direction fixes the traction sign; rho(s) with c = c1 is that direction
      const double dir = trace.c1 > 0.0 ? lipschitz_direction(s, trace.c1) : (s > 0 ? 1.0 : -1.0);
      if (tau != 0.0 && (tau > 0.0) != (dir > 0.0)) {
        b.inconsistent(i, c) = 1;
        ++b.inconsistent_count;
      }
    }
  return b;
}

Eigen::MatrixXd friction_coefficient(const Eigen::MatrixXd& g, const Eigen::MatrixXd& sigma_n,
                                     double c0) {
  if (!(c0 > 0.0))
    throw InvalidArgument("friction_coefficient needs c0 > 0");
  if (g.rows() != sigma_n.rows() || g.cols() != sigma_n.cols())
    throw InvalidArgument("friction bound and normal traction shapes differ");
  Eigen::MatrixXd f = Eigen::MatrixXd::Constant(g.rows(), g.cols(), kNaN);
  for (Index c = 0; c < g.cols(); ++c)
    for (Index i = 0; i < g.rows(); ++i)
      if (!std::isnan(g(i, c)) && std::abs(sigma_n(i, c)) >= c0)
        f(i, c) = g(i, c) / std::abs(sigma_n(i, c));
  return f;
}

std::string to_string(RecoveryMode mode) {
  return mode == RecoveryMode::ClosedLoop ? "closed-loop" : "full-inverse";
}

RecoveryMode parse_recovery_mode(const std::string& s) {
  if (s == "closed-loop")
    return RecoveryMode::ClosedLoop;
  if (s == "full-inverse")
    return RecoveryMode::FullInverse;
  throw InvalidArgument("unknown recovery mode '" + s + "' (closed-loop or full-inverse)");
}

// Whole mesh over the continuation window plus a margin: unknown initial state
// and tangential fault traction, prescribed normal traction, patch data as
// targets. `rec` only fixes the window.
TractionSolve traction_solve(const Scenario& sc, const ObservationSet& obs,
                             const ReconstructedField& rec, const RecoveryOptions& opt) {
  const Mesh& mesh = sc.mesh;
  const FaultTopology& fault = *mesh.fault();
  const double h = mesh.grid().h;
  if (rec.steps.size() < 3)
    throw InvalidArgument("continued field is too short for the traction solve");
  const Index first = rec.steps.front();
  const Index steps = rec.steps.back() - first;

  RegionWaveModel model(mesh, sc.material, std::vector<char>(std::size_t(mesh.node_count()), 1),
                        {}, sc.dt, steps);
  {
    Eigen::SparseMatrix<double> b(2 * model.size(), fault.size());
    std::vector<Eigen::Triplet<double>> t;
    for (Index i = 0; i < fault.size(); ++i) {
      const Index p = model.local(fault.plus_ids[std::size_t(i)]);
      const Index m = model.local(fault.minus_ids[std::size_t(i)]);
      for (int c = 0; c < 2; ++c) {
        t.emplace_back(2 * p + c, i, -opt.traction_scale * fault.tangent(c));
        t.emplace_back(2 * m + c, i, opt.traction_scale * fault.tangent(c));
      }
    }
    b.setFromTriplets(t.begin(), t.end());
    model.set_forcing(std::move(b));
  }

  Eigen::VectorXd profile = Eigen::VectorXd::Zero(2 * model.size());
  if (sc.source.active())
    for (Index l = 0; l < model.size(); ++l)
      profile.segment<2>(2 * l) = sc.source.nodal_force.col(model.nodes()[std::size_t(l)]);
  RegionWaveModel::Drive drive;
  drive.force = [&](Index k, Eigen::VectorXd& f) {
    const double t = sc.time(first + k);
    if (sc.source.active())
      f += sc.source.amplitude(t) * profile;
    for (Index i = 0; i < fault.size(); ++i) {
      const Index p = fault.plus_ids[std::size_t(i)];
      const Eigen::Vector2d load = h * sc.normal_traction(mesh.coord(p).x(), t) * fault.normal;
      f.segment<2>(2 * model.local(p)) -= load;
      f.segment<2>(2 * model.local(fault.minus_ids[std::size_t(i)])) += load;
    }
  };

  // patch data over the window
  const auto col0 = std::find(obs.steps.begin(), obs.steps.end(), first);
  if (col0 == obs.steps.end() || obs.steps.end() - col0 <= steps ||
      *(col0 + steps) != first + steps)
    throw InvalidArgument("observations do not cover the traction window at every step");
  std::vector<Index> observed;
  for (Index id : obs.data.nodes)
    observed.push_back(model.local(id));
  Eigen::MatrixXd data = obs.data.values.middleCols(col0 - obs.steps.begin(), steps + 1);
  model.forward(model.zero_controls(), &drive, [&](Index k, const Eigen::VectorXd& u) {
    for (std::size_t s = 0; s < observed.size(); ++s)
      data.block<2, 1>(2 * Index(s), k) -= u.segment<2>(2 * observed[s]);
  });
  const ObservedLeastSquares ls(model, observed, std::move(data));

  // Zero start. Seeding the initial state from the continued field keeps its
  // errors along weakly observed directions, which CGLS never removes.
  RegionWaveModel::Controls x = model.zero_controls();

  double target = 0;
  if (obs.noise_level > 0.0) {
    const Index c0 = col0 - obs.steps.begin();
    SampledField window_noise;
    window_noise.nodes = obs.data.nodes;
    window_noise.times.assign(obs.data.times.begin() + c0, obs.data.times.begin() + c0 + steps + 1);
    window_noise.values = unit_noise(mesh.grid(), obs.data, 0x5eedULL).middleCols(c0, steps + 1);
    target = opt.continuation.discrepancy_factor * obs.noise_level *
             discrete_norm(mesh.grid(), window_noise, NormKind::L2);
  }

  std::vector<double> ladder = opt.traction_alpha;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  TractionSolve out;
  for (double alpha : ladder) {
    CglsResult r = cgls(ls, alpha, std::move(x), opt.traction_iterations, opt.traction_tolerance, target);
    x = std::move(r.x);
    out.misfit = r.misfit;
    out.iterations += r.iterations;
  }

  out.first = first;
  out.levels.reserve(std::size_t(steps + 1));
  model.forward(x, &drive, [&](Index, const Eigen::VectorXd& u) {
    VectorField full(2, mesh.node_count());
    for (Index l = 0; l < model.size(); ++l)
      full.col(model.nodes()[std::size_t(l)]) = u.segment<2>(2 * l);
    out.levels.push_back(std::move(full));
  });
  return out;
}

namespace {

void finish_estimate(FrictionEstimate& e, const Scenario& sc) {
  const FrictionBound b = friction_bound(e.trace);
  e.g_hat = b.g;
  e.inconsistent = b.inconsistent_count;
  e.f_hat = friction_coefficient(b.g, e.trace.sigma_n, sc.c0);
  const Index nf = e.f_hat.rows(), nt = e.f_hat.cols();
  e.f_true.resize(nf, nt);
  e.error = Eigen::MatrixXd::Constant(nf, nt, kNaN);
  double num = 0, den = 0;
  Index defined = 0;
  for (Index c = 0; c < nt; ++c)
    for (Index i = 0; i < nf; ++i) {
      e.f_true(i, c) = sc.friction_coefficient(e.trace.x[std::size_t(i)], e.trace.times[std::size_t(c)]);
      if (std::isnan(e.f_hat(i, c)))
        continue;
      ++defined;
      e.error(i, c) = e.f_hat(i, c) - e.f_true(i, c);
      num += e.error(i, c) * e.error(i, c);
      den += e.f_true(i, c) * e.f_true(i, c);
    }
  e.coverage = (nf * nt) > 0 ? double(defined) / double(nf * nt) : 0.0;
  e.slipping = defined > 0;
  e.outcome = e.slipping ? "ok" : "no slipping region";
  if (e.slipping)
    e.relative_error = std::sqrt(num / den);
}

} // namespace

FrictionEstimate recover(const Scenario& sc, const RegionSet& regions, const ObservationSet& obs,
                         RecoveryMode mode, const TrajectoryRecord* trajectory,
                         const RecoveryOptions& opt) {
  const ElasticOperator op(sc.mesh, sc.material);
  const double half = 0.5 * sc.half_window;
  FrictionEstimate e;
  if (mode == RecoveryMode::ClosedLoop) {
    if (!trajectory)
      throw InvalidArgument("closed-loop recovery needs the forward trajectory");
    e.trace = fault_trace(op, sc.source, FieldHistory::of(*trajectory), -half, half, sc.c1);
    finish_estimate(e, sc);
    return e;
  }

  ContinuationProblem cp = opt.continuation;
  cp.scenario = &sc;
  cp.obs = &obs;
  cp.regions = &regions;
  // one extra level each side so the trace has centred differences at +-T/2
  cp.window = half + opt.window_margin * sc.half_window + 2.5 * sc.dt;
  e.continuation = continue_wavefield(cp);
  if (!e.continuation.converged && !opt.accept_unconverged)
    throw ContinuationError("continuation did not converge within " +
                                std::to_string(cp.max_iterations) + " iterations per weight",
                            e.continuation);

  const TractionSolve in = traction_solve(sc, obs, e.continuation, opt);
  e.traction_misfit = in.misfit;
  e.traction_iterations = in.iterations;
  FieldHistory fh;
  fh.at = [&in](Index k) -> const VectorField& { return in.levels[std::size_t(k - in.first)]; };
  fh.first = in.first + 1; // the model's first level follows a half kick
  fh.last = in.first + Index(in.levels.size()) - 1;
  fh.t_start = sc.t_start();
  fh.dt = sc.dt;
  e.trace = fault_trace(op, sc.source, fh, -half, half, sc.c1);
  finish_estimate(e, sc);
  return e;
}

StabilityCurve stability_sweep(const Scenario& sc, const RegionSet& regions,
                               const ObservationSet& clean, const std::vector<double>& levels,
                               const std::vector<std::uint64_t>& seeds,
                               const RecoveryOptions& opt) {
  if (levels.empty() || seeds.empty())
    throw InvalidArgument("sweep needs at least one level and one seed");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 0.0)
      throw InvalidArgument("noise levels must be non-negative");
    if (k > 0 && !(levels[k] > levels[k - 1]))
      throw InvalidArgument("noise levels must be strictly increasing");
  }
  StabilityCurve curve;
  for (double eps0 : levels) {
    std::vector<double> errs;
    for (std::uint64_t seed : seeds) {
      StabilityCell cell{eps0, seed, kNaN, "ok"};
      try {
        const ObservationSet noisy = add_noise(sc.mesh.grid(), clean, eps0, seed);
        const FrictionEstimate est = recover(sc, regions, noisy, RecoveryMode::FullInverse, nullptr, opt);
        cell.error = est.relative_error;
        cell.status = est.outcome;
        if (!std::isnan(cell.error))
          errs.push_back(cell.error);
      } catch (const ContinuationError& ex) {
        cell.status = std::string("continuation: ") + ex.what();
      } catch (const std::exception& ex) {
        cell.status = ex.what();
      }
      curve.cells.push_back(cell);
    }
    StabilityRow row;
    row.eps0 = eps0;
    row.seeds_used = Index(errs.size());
    if (!errs.empty()) {
      std::sort(errs.begin(), errs.end());
      const std::size_t n = errs.size();
      row.median_error = n % 2 ? errs[n / 2] : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
    }
    curve.rows.push_back(row);
  }
  // smallest C with C / log|log eps0| >= median on every level where it is defined
  double c = 0;
  bool any = false;
  for (const StabilityRow& r : curve.rows)
    if (r.eps0 > 0.0 && r.eps0 <= std::exp(-std::numbers::e) && !std::isnan(r.median_error)) {
      c = std::max(c, r.median_error / loglog_bound(r.eps0, 1.0, 1.0));
      any = true;
    }
  if (any && c > 0.0) {
    curve.fitted_c = c;
    for (StabilityRow& r : curve.rows)
      if (r.eps0 > 0.0 && r.eps0 <= std::exp(-std::numbers::e))
        r.bound = loglog_bound(r.eps0, c, 1.0);
  }
  return curve;
}

namespace {
void cell(std::ostream& os, double v) {
  if (!std::isnan(v))
    os << v;
}
} // namespace

void write_estimate_csv(std::ostream& os, const FrictionEstimate& e) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "t,x,sigma_n,sigma_tau,jump_rate,valid,g_hat,F_hat,F_true\n";
  const auto& tr = e.trace;
  for (std::size_t c = 0; c < tr.times.size(); ++c)
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
      const Index ii = Index(i), cc = Index(c);
      buf << tr.times[c] << ',' << tr.x[i] << ',' << tr.sigma_n(ii, cc) << ','
          << tr.sigma_tau(ii, cc) << ',' << tr.jump_rate(ii, cc) << ',' << int(tr.valid(ii, cc))
          << ',';
      cell(buf, e.g_hat(ii, cc));
      buf << ',';
      cell(buf, e.f_hat(ii, cc));
      buf << ',' << e.f_true(ii, cc) << '\n';
    }
  os << buf.str();
}

void write_curve_csv(std::ostream& os, const StabilityCurve& c) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "eps0,median_error,loglog_bound,seeds_used\n";
  for (const StabilityRow& r : c.rows) {
    buf << r.eps0 << ',';
    cell(buf, r.median_error);
    buf << ',';
    cell(buf, r.bound);
    buf << ',' << r.seeds_used << '\n';
  }
  os << buf.str();
}

void write_curve_svg(std::ostream& os, const StabilityCurve& c) {
  Series median{"median error", {}, {}, true}, bound{"fitted C / log|log eps0|", {}, {}, false};
  for (const auto& r : c.rows) {
    median.x.push_back(r.eps0);
    median.y.push_back(r.median_error);
  }
  std::vector<Series> series{median};
  if (std::isfinite(c.fitted_c) && !c.rows.empty()) {
    const double lo = c.rows.front().eps0;
    const double hi = std::min(c.rows.back().eps0, std::exp(-std::numbers::e));
    if (lo > 0.0 && lo <= hi) {
      constexpr int kPoints = 60;
      for (int k = 0; k <= kPoints; ++k) {
        const double e = lo * std::pow(hi / lo, double(k) / kPoints);
        bound.x.push_back(e);
        bound.y.push_back(loglog_bound(std::min(e, hi), c.fitted_c, c.exponent));
      }
      series.push_back(std::move(bound));
    }
  }
  write_lines_svg(os, series, "stability sweep", "eps0", "relative error", true);
}

} // namespace tresca
