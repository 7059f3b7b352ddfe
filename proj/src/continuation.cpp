#include "tresca/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

namespace tresca {

// ---------------------------------------------------------------- controls

double RegionWaveModel::Controls::dot(const Controls& o) const {
  double s = u0.dot(o.u0) + v0.dot(o.v0);
  if (force.size() > 0)
    s += (force.array() * o.force.array()).sum();
  return s;
}

RegionWaveModel::Controls& RegionWaveModel::Controls::axpy(double a, const Controls& o) {
  u0 += a * o.u0;
  v0 += a * o.v0;
  if (force.size() > 0)
    force += a * o.force;
  return *this;
}

RegionWaveModel::Controls& RegionWaveModel::Controls::scale(double a) {
  u0 *= a;
  v0 *= a;
  force *= a;
  return *this;
}

// ------------------------------------------------------------------- model

RegionWaveModel::RegionWaveModel(const Mesh& mesh, const MaterialField& material,
                                 const std::vector<char>& active,
                                 const std::vector<char>& dirichlet, double dt, Index steps)
    : h_(mesh.grid().h), dt_(dt), steps_(steps) {
  const Index total = mesh.node_count();
  if (Index(active.size()) != total || (!dirichlet.empty() && Index(dirichlet.size()) != total))
    throw InvalidArgument("region masks do not match the mesh");
  if (!(dt > 0.0) || steps < 0)
    throw InvalidArgument("region model needs dt > 0 and steps >= 0");
  local_.assign(std::size_t(total), -1);
  for (Index k = 0; k < total; ++k)
    if (active[std::size_t(k)]) {
      local_[std::size_t(k)] = Index(nodes_.size());
      nodes_.push_back(k);
    }
  if (nodes_.empty())
    throw InvalidArgument("region model has no active nodes");
  const Index n = size();
  const double h2 = h_ * h_;
  mass_ = Eigen::VectorXd::Zero(n);

  std::vector<char> cut(std::size_t(n), 0);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto corners = mesh.element_nodes(e);
    bool inside = true;
    for (Index c : corners)
      inside = inside && active[std::size_t(c)];
    if (!inside) {
      for (Index c : corners)
        if (active[std::size_t(c)])
          cut[std::size_t(local(c))] = 1;
      continue;
    }
    double rho = 0;
    Eigen::Vector2d lame = Eigen::Vector2d::Zero();
    for (Index c : corners) {
      const Index b = mesh.base_of(c);
      rho += 0.25 * material.rho(b);
      lame += 0.25 * Eigen::Vector2d(material.lambda(b), material.mu(b));
    }
    const Eigen::Matrix<double, 8, 8> ke = lame(0) * ElasticOperator::unit_lambda_block() +
                                           lame(1) * ElasticOperator::unit_mu_block();
    for (int a = 0; a < 4; ++a) {
      const Index la = local(corners[a]);
      mass_(la) += 0.25 * rho * h2;
      for (int b = 0; b < 4; ++b) {
        const Index lb = local(corners[b]);
        for (int ca = 0; ca < 2; ++ca)
          for (int cb = 0; cb < 2; ++cb)
            trip.emplace_back(2 * la + ca, 2 * lb + cb, ke(2 * a + ca, 2 * b + cb));
      }
    }
  }
  stiffness_.resize(2 * n, 2 * n);
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();

  free_ = Eigen::VectorXd::Ones(2 * n);
  kick_ = Eigen::VectorXd::Zero(2 * n);
  for (Index k = 0; k < n; ++k) {
    const Index id = nodes_[std::size_t(k)];
    const bool fixed = mesh.is_boundary(id) || (!dirichlet.empty() && dirichlet[std::size_t(id)]) ||
                       mass_(k) == 0.0;
    if (fixed)
      free_.segment<2>(2 * k).setZero();
    else
      kick_.segment<2>(2 * k).setConstant(1.0 / mass_(k));
    if (cut[std::size_t(k)])
      cut_.push_back(k);
  }
  forcing_.resize(2 * n, 0);
}

RegionWaveModel::Controls RegionWaveModel::zero_controls() const {
  return {Eigen::VectorXd::Zero(2 * size()), Eigen::VectorXd::Zero(2 * size()),
          Eigen::MatrixXd::Zero(forcing_size(), steps_)};
}

void RegionWaveModel::forward(const Controls& x, const Drive* drive,
                              const Observer& observe) const {
  const double sf = std::sqrt(h_ / dt_);
  Eigen::VectorXd u = x.u0.cwiseProduct(free_) / h_;
  Eigen::VectorXd v = x.v0.cwiseProduct(free_) / h_;
  Eigen::VectorXd f(2 * size());
  const bool forced = forcing_size() > 0 && x.force.cols() == steps_;
  if (drive && drive->dirichlet)
    drive->dirichlet(0, u);
  if (observe)
    observe(0, u);
  for (Index k = 0; k < steps_; ++k) {
    const double c = k == 0 ? 0.5 * dt_ : dt_;
    f.noalias() = -(stiffness_ * u);
    if (forced)
      f.noalias() += sf * (forcing_ * x.force.col(k));
    if (drive && drive->force)
      drive->force(k, f);
    v += c * kick_.cwiseProduct(f);
    u += dt_ * v;
    if (drive && drive->dirichlet)
      drive->dirichlet(k + 1, u);
    if (observe)
      observe(k + 1, u);
  }
}

RegionWaveModel::Controls RegionWaveModel::adjoint(const Injector& inject) const {
  const double sf = std::sqrt(h_ / dt_);
  Controls g = zero_controls();
  Eigen::VectorXd lu = Eigen::VectorXd::Zero(2 * size());
  Eigen::VectorXd lv = Eigen::VectorXd::Zero(2 * size());
  Eigen::VectorXd q(2 * size());
  inject(steps_, lu);
  for (Index k = steps_ - 1; k >= 0; --k) {
    const double c = k == 0 ? 0.5 * dt_ : dt_;
    lv += dt_ * lu;
    q = c * kick_.cwiseProduct(lv);
    if (forcing_size() > 0)
      g.force.col(k).noalias() = sf * (forcing_.transpose() * q);
    lu.noalias() -= stiffness_ * q;
    inject(k, lu);
  }
  g.u0 = lu.cwiseProduct(free_) / h_;
  g.v0 = lv.cwiseProduct(free_) / h_;
  return g;
}

// ----------------------------------------------------------- least squares

ObservedLeastSquares::ObservedLeastSquares(const RegionWaveModel& model,
                                           std::vector<Index> observed, Eigen::MatrixXd data)
    : model_(model), observed_(std::move(observed)), data_(std::move(data)) {
  const Index levels = model.steps() + 1;
  if (data_.rows() != 2 * Index(observed_.size()) || data_.cols() != levels)
    throw InvalidArgument("observation data do not match the observed nodes and levels");
  for (Index s : observed_)
    if (s < 0 || s >= model.size())
      throw InvalidArgument("observed node outside the model region");
  weight_.resize(levels);
  for (Index k = 0; k < levels; ++k) {
    const double w = (levels == 1) ? 1.0 : ((k == 0 || k == levels - 1) ? 0.5 : 1.0) * model.dt();
    weight_(k) = model.h() * std::sqrt(w);
  }
  for (Index k = 0; k < levels; ++k)
    data_.col(k) *= weight_(k);
}

Eigen::MatrixXd ObservedLeastSquares::apply(const RegionWaveModel::Controls& x) const {
  Eigen::MatrixXd out(data_.rows(), data_.cols());
  model_.forward(x, nullptr, [&](Index k, const Eigen::VectorXd& u) {
    for (std::size_t s = 0; s < observed_.size(); ++s)
      out.block<2, 1>(2 * Index(s), k) = weight_(k) * u.segment<2>(2 * observed_[s]);
  });
  return out;
}

RegionWaveModel::Controls ObservedLeastSquares::apply_transpose(const Eigen::MatrixXd& r) const {
  return model_.adjoint([&](Index k, Eigen::VectorXd& lambda) {
    for (std::size_t s = 0; s < observed_.size(); ++s)
      lambda.segment<2>(2 * observed_[s]) += weight_(k) * r.block<2, 1>(2 * Index(s), k);
  });
}

Eigen::MatrixXd ObservedLeastSquares::residual(const RegionWaveModel::Controls& x) const {
  return apply(x) - data_;
}

double ObservedLeastSquares::objective(const RegionWaveModel::Controls& x, double alpha) const {
  return 0.5 * residual(x).squaredNorm() + 0.5 * alpha * x.squared_norm();
}

RegionWaveModel::Controls ObservedLeastSquares::gradient(const RegionWaveModel::Controls& x,
                                                         double alpha) const {
  RegionWaveModel::Controls g = apply_transpose(residual(x));
  return g.axpy(alpha, x);
}

CglsResult cgls(const ObservedLeastSquares& ls, double alpha, RegionWaveModel::Controls x,
                Index max_iterations, double tolerance, double stop_misfit) {
  using Controls = RegionWaveModel::Controls;
  CglsResult out;
  Eigen::MatrixXd r = ls.data() - ls.apply(x);
  // reference gradient: the one at the zero control
  const double ref = ls.apply_transpose(ls.data()).squared_norm();
  Controls s = ls.apply_transpose(r);
  s.axpy(-alpha, x);
  Controls p = s;
  double gamma = s.squared_norm();
  auto objective = [&] { return 0.5 * r.squaredNorm() + 0.5 * alpha * x.squared_norm(); };
  out.objective_history.push_back(objective());
  for (;;) {
    const double misfit = r.norm();
    if (gamma <= tolerance * tolerance * ref || gamma == 0.0 ||
        (stop_misfit > 0.0 && misfit <= stop_misfit)) {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_iterations)
      break;
    const Eigen::MatrixXd q = ls.apply(p);
    const double delta = q.squaredNorm() + alpha * p.squared_norm();
    if (!(delta > 0.0))
      break;
    const double step = gamma / delta;
    x.axpy(step, p);
    r -= step * q;
    s = ls.apply_transpose(r);
    s.axpy(-alpha, x);
    const double next = s.squared_norm();
    p.scale(next / gamma).axpy(1.0, s);
    gamma = next;
    ++out.iterations;
    out.objective_history.push_back(objective());
  }
  out.misfit = r.norm();
  out.regularizer = x.squared_norm();
  out.x = std::move(x);
  return out;
}

// ------------------------------------------------------------ continuation

ReconstructedField continue_wavefield(const ContinuationProblem& pb) {
  if (!pb.scenario || !pb.obs || !pb.regions)
    throw InvalidArgument("continuation problem is incomplete");
  const Scenario& sc = *pb.scenario;
  const ObservationSet& obs = *pb.obs;
  const Mesh& mesh = sc.mesh;
  const Grid& grid = mesh.grid();
  if (obs.steps.size() < 2)
    throw InvalidArgument("continuation needs at least two recorded levels");
  for (std::size_t k = 1; k < obs.steps.size(); ++k)
    if (obs.steps[k] != obs.steps[k - 1] + 1)
      throw InvalidArgument("continuation needs every step recorded (snapshot stride 1)");
  for (double a : pb.alpha_ladder)
    if (!(a > 0.0))
      throw InvalidArgument("regularization weights must be positive");

  const Index first = obs.steps.front();
  const Index steps = obs.steps.back() - first;
  const double window = pb.window > 0 ? pb.window : 0.5 * sc.half_window;
  const double t_lo = sc.time(first), t_hi = sc.time(first + steps);
  if (-window < t_lo - 1e-9 * sc.dt || window > t_hi + 1e-9 * sc.dt)
    throw InvalidArgument("reconstruction window exceeds the observation span");

  std::vector<char> active(std::size_t(mesh.node_count()), 0);
  for (Index k = 0; k < mesh.node_count(); ++k)
    active[std::size_t(k)] = !pb.regions->d_extension[mesh.base_of(k)] && k < grid.base_count();
  RegionWaveModel model(mesh, sc.material, active, {}, sc.dt, steps);

  // unknown boundary forces on the nodes next to D
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

  RegionWaveModel::Drive drive;
  if (sc.source.active()) {
    Eigen::VectorXd profile(2 * model.size());
    for (Index k = 0; k < model.size(); ++k)
      profile.segment<2>(2 * k) = sc.source.nodal_force.col(model.nodes()[std::size_t(k)]);
    drive.force = [profile, &sc, first](Index k, Eigen::VectorXd& f) {
      f += sc.source.amplitude(sc.time(first + k)) * profile;
    };
  }

  std::vector<Index> observed;
  for (Index id : obs.data.nodes) {
    const Index l = model.local(id);
    if (l < 0)
      throw GeometryViolation("observation patch overlaps the fault extension region");
    observed.push_back(l);
  }
  Eigen::MatrixXd data = obs.data.values;
  model.forward(model.zero_controls(), &drive, [&](Index k, const Eigen::VectorXd& u) {
    for (std::size_t s = 0; s < observed.size(); ++s)
      data.block<2, 1>(2 * Index(s), k) -= u.segment<2>(2 * observed[s]);
  });
  const ObservedLeastSquares ls(model, observed, std::move(data));

  ReconstructedField rec;
  rec.zero_misfit = ls.data().norm();
  if (obs.noise_level > 0.0) {
    const Eigen::MatrixXd unit = unit_noise(grid, obs.data, 0x5eedULL);
    rec.noise_target = pb.discrepancy_factor * obs.noise_level *
                       discrete_norm(grid, with_values(obs.data, unit), NormKind::L2);
  }
  std::vector<double> ladder = pb.alpha_ladder;
  if (ladder.empty())
    ladder = {1e-2, 1e-4};
  std::sort(ladder.begin(), ladder.end(), std::greater<>());

  RegionWaveModel::Controls x = model.zero_controls();
  for (double alpha : ladder) {
    CglsResult r = cgls(ls, alpha, std::move(x), pb.max_iterations, pb.tolerance);
    x = std::move(r.x);
    rec.alpha = alpha;
    rec.alpha_ladder.push_back(alpha);
    rec.ladder_misfit.push_back(r.misfit);
    rec.iterations += r.iterations;
    rec.converged = r.converged;
    rec.data_misfit = r.misfit;
    rec.regularizer = r.regularizer;
    rec.objective_history.insert(rec.objective_history.end(), r.objective_history.begin(),
                                 r.objective_history.end());
    if (rec.noise_target > 0.0 && r.misfit <= rec.noise_target)
      break;
  }

  // keep region nodes over the shrunk window
  for (Index k = 0; k <= steps; ++k) {
    const double t = sc.time(first + k);
    if (t >= -window - 1e-9 * sc.dt && t <= window + 1e-9 * sc.dt) {
      rec.steps.push_back(first + k);
      rec.field.times.push_back(t);
    }
  }
  rec.field.nodes = model.nodes();
  rec.field.values.resize(2 * model.size(), Index(rec.steps.size()));
  Index col = 0;
  const Index k0 = rec.steps.empty() ? 0 : rec.steps.front() - first;
  model.forward(x, &drive, [&](Index k, const Eigen::VectorXd& u) {
    if (k >= k0 && col < Index(rec.steps.size()))
      rec.field.values.col(col++) = u;
  });
  return rec;
}

CollarError collar_error(const Grid& grid, const ReconstructedField& rec,
                         const TrajectoryRecord& truth, const RegionMask& collar) {
  const Index nt = rec.field.time_count(), nn = rec.field.node_count();
  Eigen::MatrixXd diff(2 * nn, nt);
  for (Index k = 0; k < nt; ++k) {
    const VectorField& u = truth.at_step(rec.steps[std::size_t(k)]);
    for (Index s = 0; s < nn; ++s)
      diff.block<2, 1>(2 * s, k) =
          rec.field.values.block<2, 1>(2 * s, k) - u.col(rec.field.nodes[std::size_t(s)]);
  }
  CollarError e;
  e.full = discrete_norm(grid, with_values(rec.field, diff), NormKind::L2);

  SampledField sub;
  sub.times = rec.field.times;
  std::vector<Index> rows;
  for (Index s = 0; s < nn; ++s)
    if (collar[rec.field.nodes[std::size_t(s)]]) {
      sub.nodes.push_back(rec.field.nodes[std::size_t(s)]);
      rows.push_back(s);
    }
  if (sub.nodes.empty())
    return e;
  sub.values.resize(2 * Index(rows.size()), nt);
  for (std::size_t r = 0; r < rows.size(); ++r)
    sub.values.middleRows<2>(2 * Index(r)) = diff.middleRows<2>(2 * rows[r]);
  e.collar = discrete_norm(grid, sub, NormKind::L2);
  return e;
}

double loglog_bound(double eps0, double C, double c) {
  const double top = std::exp(-std::numbers::e);
  if (!(eps0 > 0.0) || eps0 > top * (1.0 + 1e-12))
    throw DomainError("loglog_bound needs 0 < eps0 <= e^-e");
  if (!(C > 0.0) || !(c > 0.0))
    throw InvalidArgument("loglog_bound needs C > 0 and c > 0");
  const double ll = std::log(std::abs(std::log(eps0)));
  return C * std::pow(ll, -c);
}

void write_reconstruction_sidecar(std::ostream& os, const ReconstructedField& rec) {
  nlohmann::ordered_json j;
  j["alpha"] = rec.alpha;
  j["alpha_ladder"] = rec.alpha_ladder;
  j["ladder_misfit"] = rec.ladder_misfit;
  j["noise_target"] = rec.noise_target;
  j["data_misfit"] = rec.data_misfit;
  j["zero_misfit"] = rec.zero_misfit;
  j["regularizer"] = rec.regularizer;
  j["iterations"] = rec.iterations;
  j["converged"] = rec.converged;
  j["objective_history"] = rec.objective_history;
  j["times"] = rec.field.times;
  os << j.dump(2) << '\n';
}

} // namespace tresca
