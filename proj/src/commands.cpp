#include "tresca/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Core>

#include "tresca/decomposition.hpp"
#include "tresca/field_io.hpp"
#include "tresca/observation.hpp"
#include "tresca/plot.hpp"

namespace tresca {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json RunManifest::to_json() const {
  json stages_json = json::array();
  for (const auto& s : stages)
    stages_json.push_back({{"name", s.name}, {"status", s.status}, {"detail", s.detail}});
  return {{"command", command},
          {"config", config_path},
          {"config_hash", config_hash},
          {"status", exit_code == kExitOk ? "ok" : "failed"},
          {"exit_code", exit_code},
          {"wall_time_s", wall_time},
          {"threads", threads},
          {"versions",
           {{"tresca", "0.1.0"},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}},
          {"stages", stages_json},
          {"outputs", outputs},
          {"results", results}};
}

int configured_threads() {
  const char* env = std::getenv("TRESCA_THREADS");
  if (!env || !*env)
    return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096)
    throw InvalidArgument(std::string("TRESCA_THREADS must be a positive integer, got '") + env + "'");
  return int(n);
}

namespace {

class Run {
public:
  Run(std::string command, std::string config_path, std::ostream& log)
      : log_(log), start_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.config_path = std::move(config_path);
  }

  RunManifest& manifest() { return m_; }
  std::ostream& log() { return log_; }

  void stage(const std::string& name, const std::string& status, const std::string& detail = {}) {
    m_.stages.push_back({name, status, detail});
    log_ << m_.command << ": " << name << " " << status << (detail.empty() ? "" : ": " + detail) << "\n";
  }

  void set_output_dir(const fs::path& dir) {
    fs::create_directories(dir);
    dir_ = dir;
  }
  const fs::path& dir() const { return dir_; }

  /// Opens an output file and lists it in the manifest.
  std::ofstream open(const std::string& name, bool binary = false) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, binary ? std::ios::binary : std::ios::out);
    if (!f)
      throw std::runtime_error("cannot write " + p.string());
    m_.outputs.push_back(p.string());
    return f;
  }

  int finish(int code) {
    m_.exit_code = code;
    m_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const fs::path where = dir_.empty() ? fs::path(m_.command + "_manifest.json")
                                        : dir_ / (m_.command + "_manifest.json");
    std::ofstream f(where);
    f << m_.to_json().dump(2) << "\n";
    if (!f)
      log_ << m_.command << ": could not write manifest " << where.string() << "\n";
    return code;
  }

private:
  RunManifest m_;
  std::ostream& log_;
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
};

// Maps exceptions to exit codes and records the failing stage.
template <typename Body>
int guarded(Run& run, const std::string& stage, Body&& body) {
  try {
    return run.finish(body());
  } catch (const ConfigError& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitConfig);
  } catch (const ContinuationError& e) {
    const ReconstructedField& b = e.best();
    run.manifest().results["best_iterate"] = {{"data_misfit", b.data_misfit},
                                              {"zero_misfit", b.zero_misfit},
                                              {"alpha", b.alpha},
                                              {"iterations", b.iterations},
                                              {"alpha_ladder", b.alpha_ladder},
                                              {"ladder_misfit", b.ladder_misfit}};
    run.stage(stage, "failed", e.what());
    return run.finish(kExitNumerical);
  } catch (const DivergenceError& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitNumerical);
  } catch (const InvalidArgument& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitConfig);
  } catch (const GeometryViolation& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitConfig);
  } catch (const DomainError& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitConfig);
  } catch (const std::exception& e) {
    run.stage(stage, "failed", e.what());
    return run.finish(kExitNumerical);
  }
}

// Loads the config, sets the output directory and validates the thread count.
RunConfig prepare(Run& run, std::string& stage) {
  stage = "config";
  RunConfig cfg = load_config(run.manifest().config_path);
  run.manifest().config_hash = cfg.hash;
  run.set_output_dir(cfg.output);
  run.manifest().threads = configured_threads();
  Eigen::setNbThreads(run.manifest().threads);
  run.stage("config", "ok", cfg.source);
  return cfg;
}

struct Problem {
  Scenario scenario;
  RegionSet regions;
};

Problem build(Run& run, std::string& stage, const RunConfig& cfg, Index stride = 0) {
  stage = "scenario";
  RuptureSetup su = cfg.setup;
  if (stride > 0)
    su.snapshot_stride = stride;
  Problem p{build_scenario(su), {}};
  validate(p.scenario);
  p.regions = build_regions(su, p.scenario);
  const auto violated = check_region_invariants(p.scenario.mesh.grid(), p.scenario.mesh.fault(), p.regions);
  if (!violated.empty())
    throw GeometryViolation("region invariants: " + violated.front());
  for (const auto& w : p.regions.warnings)
    run.stage("regions", "warning", w);
  const ElasticOperator op(p.scenario.mesh, p.scenario.material);
  const CompatibilityReport comp = check_compatibility(op, p.scenario);
  json checks = json::array();
  for (const auto& c : comp.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}});
  run.manifest().results["compatibility"] = checks;
  if (!comp.passed())
    throw InvalidArgument("initial data fail the compatibility checks");
  run.stage("scenario", "ok",
            std::to_string(p.scenario.mesh.grid().nx) + "x" + std::to_string(p.scenario.mesh.grid().ny) +
                " nodes, dt " + std::to_string(p.scenario.dt) + ", " +
                std::to_string(p.scenario.steps) + " steps");
  return p;
}

double traction_scale(const std::vector<FaultState>& history) {
  double s = 0;
  for (const auto& f : history) {
    s = std::max(s, f.bound.cwiseAbs().maxCoeff());
    s = std::max(s, f.normal_load.cwiseAbs().maxCoeff());
  }
  return std::max(s, 1e-300);
}

json complementarity_json(const ComplementarityReport& c) {
  return {{"max_bound_excess", c.max_bound_excess},
          {"max_codirection", c.max_codirection},
          {"max_stick_rate", c.max_stick_rate},
          {"worst_step", c.worst_step},
          {"worst_node", c.worst_node},
          {"passed", c.passed}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The forward manifest of the same config must exist and report success.
void require_forward(const Run& run, const RunConfig& cfg) {
  const fs::path m = run.dir() / "forward_manifest.json";
  if (!fs::exists(m))
    throw InvalidArgument("no forward run found: " + m.string() + " is missing");
  json j;
  try {
    j = json::parse(slurp(m));
  } catch (const json::exception& e) {
    throw InvalidArgument("unreadable forward manifest " + m.string() + ": " + e.what());
  }
  if (j.value("exit_code", -1) != 0)
    throw InvalidArgument("forward run in " + run.dir().string() + " did not succeed");
  if (j.value("config_hash", std::string()) != cfg.hash)
    throw InvalidArgument("forward run in " + run.dir().string() + " was made from a different config");
}

} // namespace

int cmd_forward(const std::string& config_path, std::ostream& log) {
  Run run("forward", config_path, log);
  std::string stage = "config";
  return guarded(run, stage, [&]() -> int {
    const RunConfig cfg = prepare(run, stage);
    const Problem p = build(run, stage, cfg);
    const Scenario& sc = p.scenario;

    stage = "simulate";
    const TrajectoryRecord traj = simulate(sc);
    const EnergyBalance energy = energy_report(traj);
    run.stage("simulate", "ok", std::to_string(traj.steps) + " steps");

    stage = "write";
    {
      std::ofstream f = run.open("snapshots.bin", true);
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
        write_field(f, sc.mesh.grid(), traj.snapshots[k], traj.snapshot_steps[k], sc.dt, sc.t_start());
    }
    {
      std::ofstream f = run.open("fault.csv");
      write_fault_csv(f, sc.mesh, traj.fault);
    }
    {
      std::ofstream f = run.open("energy.csv");
      write_energy_csv(f, energy);
    }
    {
      std::ofstream f = run.open("regions.csv");
      write_masks_csv(f, sc.mesh.grid(), p.regions);
    }
    run.stage("write", "ok");

    double worst = 0;
    for (double r : energy.residual)
      worst = std::max(worst, std::abs(r));
    Index slipping = 0, entries = 0;
    for (const auto& f : traj.fault)
      for (SlipMode m : f.mode) {
        slipping += m == SlipMode::Slip;
        ++entries;
      }
    auto& r = run.manifest().results;
    r["steps"] = traj.steps;
    r["dt"] = sc.dt;
    r["snapshot_stride"] = traj.stride;
    r["lambda0"] = traj.lambda0;
    r["max_energy"] = energy.max_energy;
    r["max_energy_residual"] = worst;
    r["slip_fraction"] = entries ? double(slipping) / double(entries) : 0.0;
    return kExitOk;
  });
}

namespace {

// averaging radius of the weak decomposition residual, per unit extent
constexpr double kMollifierRadius = 0.08;

struct Check {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool passed = false;
  std::string detail;
};

std::vector<double> csv_column(const std::string& text, const std::string& column) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::size_t index = 0, k = 0;
  bool found = false;
  {
    std::istringstream h(line);
    std::string name;
    while (std::getline(h, name, ',')) {
      if (name == column) {
        index = k;
        found = true;
      }
      ++k;
    }
  }
  if (!found)
    throw InvalidArgument("column '" + column + "' missing");
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    for (std::size_t c = 0; std::getline(row, cell, ','); ++c)
      if (c == index) {
        out.push_back(std::stod(cell));
        break;
      }
  }
  return out;
}

} // namespace

int cmd_verify(const std::string& config_path, std::ostream& log) {
  Run run("verify", config_path, log);
  std::string stage = "config";
  return guarded(run, stage, [&]() -> int {
    const RunConfig cfg = prepare(run, stage);
    stage = "load";
    require_forward(run, cfg);
    // geometry only; the fields come from the forward outputs
    RuptureSetup su = cfg.setup;
    su.prestress = false;
    const Scenario sc = build_scenario(su);
    const Grid& grid = sc.mesh.grid();
    const FaultTopology& fault = *sc.mesh.fault();

    std::vector<FaultState> history;
    {
      std::ifstream f(run.dir() / "fault.csv");
      if (!f)
        throw InvalidArgument("missing " + (run.dir() / "fault.csv").string());
      history = read_fault_csv(f, fault.size());
    }
    const std::string energy_text = slurp(run.dir() / "energy.csv");
    if (energy_text.empty())
      throw InvalidArgument("missing " + (run.dir() / "energy.csv").string());
    run.stage("load", "ok", std::to_string(history.size()) + " fault steps");

    stage = "checks";
    std::vector<Check> checks;
    const double scale = traction_scale(history);
    {
      const ComplementarityReport c = check_complementarity(history, scale);
      Check k{"complementarity", std::max(c.max_bound_excess, c.max_codirection) / scale, 1e-8, c.passed, ""};
      if (c.worst_step >= 0)
        k.detail = "worst at step " + std::to_string(c.worst_step) + " node " + std::to_string(c.worst_node);
      checks.push_back(k);
      run.manifest().results["complementarity"] = complementarity_json(c);
    }
    {
      const auto residual = csv_column(energy_text, "residual");
      const auto kinetic = csv_column(energy_text, "kinetic");
      const auto strain = csv_column(energy_text, "strain");
      const auto dissipation = csv_column(energy_text, "dissipation");
      double worst = 0, emax = 0, drop = 0;
      for (std::size_t k = 0; k < residual.size(); ++k) {
        worst = std::max(worst, std::abs(residual[k]));
        emax = std::max(emax, kinetic[k] + strain[k]);
        if (k > 0)
          drop = std::max(drop, dissipation[k - 1] - dissipation[k]);
      }
      checks.push_back({"energy_balance", emax > 0 ? worst / emax : worst, 1e-3,
                        worst <= 1e-3 * emax, ""});
      checks.push_back({"dissipation_monotone", drop, 0.0, drop <= 0.0, ""});
    }
    {
      // g (|w| - |s|) - sigma_tau (w - s) >= 0 for every tangential test rate w
      std::mt19937_64 rng(12345);
      std::normal_distribution<double> normal;
      double worst = 0;
      Index worst_step = -1;
      for (std::size_t k = 0; k < history.size(); ++k) {
        const FaultState& f = history[k];
        const double rate_scale = std::max(1.0, f.slip_rate.cwiseAbs().maxCoeff());
        for (int sample = 0; sample < 4; ++sample) {
          double lhs = 0;
          for (Index i = 0; i < f.traction.size(); ++i) {
            const double w = rate_scale * normal(rng), s = f.slip_rate(i);
            lhs += grid.h * (f.bound(i) * (std::abs(w) - std::abs(s)) - f.traction(i) * (w - s));
          }
          const double rel = -lhs / (grid.h * double(f.traction.size()) * scale * rate_scale);
          if (rel > worst) {
            worst = rel;
            worst_step = Index(k);
          }
        }
      }
      checks.push_back({"variational_inequality", worst, 1e-8, worst <= 1e-8,
                        worst_step >= 0 ? "worst at step " + std::to_string(worst_step) : ""});
    }
    {
      // weak residual of the decomposed system away from the fault and the
      // drive, relative to the spatial terms alone
      const fs::path snap_path = run.dir() / "snapshots.bin";
      std::ifstream f(snap_path, std::ios::binary);
      if (!f)
        throw InvalidArgument("missing " + snap_path.string());
      SampledField u;
      for (Index id = 0; id < grid.base_count(); ++id) {
        const Index i = grid.col(id), j = grid.row(id);
        if (i < 2 || j < 2 || i > grid.nx - 3 || j > grid.ny - 3)
          continue;
        if (distance_to_fault(grid, fault, grid.coord(id)) < 3.0 * grid.h)
          continue;
        bool driven = false;
        for (Index dj = -3; dj <= 3 && !driven; ++dj)
          for (Index di = -3; di <= 3 && !driven; ++di) {
            const Index a = i + di, b = j + dj;
            if (a >= 0 && b >= 0 && a < grid.nx && b < grid.ny && sc.source.active())
              driven = sc.source.nodal_force.col(grid.id(a, b)).squaredNorm() > 0.0;
          }
        if (!driven)
          u.nodes.push_back(id);
      }
      SnapshotHeader hdr;
      std::vector<double> data;
      std::vector<std::pair<Index, double>> stamps; // time index, t
      while (read_snapshot(f, hdr, data))
        stamps.emplace_back(hdr.time_index, hdr.t0 + double(hdr.time_index) * hdr.dt);
      // evenly spaced run, thinned to at most kLevels levels
      constexpr std::size_t kLevels = 250;
      std::size_t even = stamps.size();
      if (stamps.size() >= 2) {
        const Index spacing = stamps[1].first - stamps[0].first;
        for (std::size_t k = 1; k < stamps.size(); ++k)
          if (stamps[k].first - stamps[k - 1].first != spacing) {
            even = k; // the closing snapshot may break the stride
            break;
          }
      }
      const std::size_t thin = std::max<std::size_t>(1, (even + kLevels - 1) / kLevels);
      const std::size_t levels = (even + thin - 1) / thin;
      if (levels < 3)
        throw InvalidArgument("snapshots.bin holds fewer than three evenly spaced snapshots");
      const Index spacing = Index(thin) * (stamps[1].first - stamps[0].first);
      f.clear();
      f.seekg(0);
      u.values.resize(2 * u.node_count(), Index(levels));
      for (std::size_t k = 0, col = 0; col < levels && read_snapshot(f, hdr, data); ++k) {
        if (k % thin)
          continue;
        for (std::size_t s = 0; s < u.nodes.size(); ++s) {
          const Index i = grid.col(u.nodes[s]), j = grid.row(u.nodes[s]);
          for (int c = 0; c < 2; ++c)
            u.values(2 * Index(s) + c, Index(col)) = data[std::size_t(((j * grid.nx) + i) * 2 + c)];
        }
        u.times.push_back(stamps[k].second);
        ++col;
      }
      const double radius = kMollifierRadius * cfg.setup.extent;
      const DecomposedField dec = decompose(mollify(u, grid, radius), grid, &fault);
      const double mu = cfg.setup.mu, lambda = cfg.setup.lambda, rho = cfg.setup.rho;
      const double tau = sc.dt * double(spacing);
      const SystemResidual r = system_residual(dec, grid, rho, lambda, mu, tau);
      const SystemResidual spatial = system_residual(dec, grid, 0.0, lambda, mu, tau);
      const auto rel = [](double a, double b) { return b > 0 ? a / b : a; };
      const double worst = std::max({rel(r.r_u, spatial.r_u), rel(r.r_v, spatial.r_v), rel(r.r_w, spatial.r_w)});
      const bool sampled = spatial.r_u > 0 || spatial.r_v > 0 || spatial.r_w > 0;
      checks.push_back({"decomposition_residual", worst, 0.1, sampled && worst <= 0.1,
                        sampled ? "weak residual, snapshot spacing " + std::to_string(spacing) + " steps"
                                : "grid too coarse for the averaging radius"});
      std::ofstream out = run.open("decomposition.csv");
      write_residual_csv(out, {{grid.h, r}});
    }

    {
      std::ofstream f = run.open("verify_report.csv");
      std::ostringstream buf;
      buf.precision(17);
      buf << "check,measured,tolerance,passed,detail\n";
      for (const auto& c : checks)
        buf << c.name << ',' << c.measured << ',' << c.tolerance << ',' << (c.passed ? "pass" : "fail")
            << ",\"" << c.detail << "\"\n";
      f << buf.str();
    }
    bool all = true;
    json report = json::array();
    for (const auto& c : checks) {
      all = all && c.passed;
      report.push_back({{"check", c.name},
                        {"measured", c.measured},
                        {"tolerance", c.tolerance},
                        {"passed", c.passed},
                        {"detail", c.detail}});
      run.stage(c.name, c.passed ? "ok" : "failed", c.detail);
    }
    run.manifest().results["checks"] = report;
    return all ? kExitOk : kExitNumerical;
  });
}

namespace {

void write_invert_plots(Run& run, const FrictionEstimate& e, const std::string& tag) {
  const auto& tr = e.trace;
  if (tr.times.empty() || tr.x.empty())
    return;
  {
    std::ofstream f = run.open("friction_" + tag + ".svg");
    write_heatmaps_svg(f, {{"true friction coefficient", e.f_true}, {"estimate", e.f_hat}},
                       tr.times.front(), tr.times.back(), tr.x.front(), tr.x.back(), "t", "x");
  }
  Series s{"RMS error over valid nodes", {}, {}, false};
  for (std::size_t c = 0; c < tr.times.size(); ++c) {
    double sum = 0;
    Index n = 0;
    for (Index i = 0; i < e.error.rows(); ++i)
      if (std::isfinite(e.error(i, Index(c)))) {
        sum += e.error(i, Index(c)) * e.error(i, Index(c));
        ++n;
      }
    s.x.push_back(tr.times[c]);
    s.y.push_back(n ? std::sqrt(sum / double(n)) : std::nan(""));
  }
  std::ofstream f = run.open("error_" + tag + ".svg");
  write_lines_svg(f, {s}, "friction coefficient error (" + tag + ")", "t", "error");
}

} // namespace

int cmd_invert(const std::string& config_path, const InvertFlags& flags, std::ostream& log) {
  Run run("invert", config_path, log);
  std::string stage = "config";
  return guarded(run, stage, [&]() -> int {
    RunConfig cfg = prepare(run, stage);
    if (flags.mode)
      cfg.mode = *flags.mode;
    if (flags.eps0) {
      if (*flags.eps0 < 0.0)
        throw InvalidArgument("--eps0 must be non-negative");
      cfg.eps0 = *flags.eps0;
    }
    if (flags.seed)
      cfg.seed = *flags.seed;
    auto& res = run.manifest().results;
    res["mode"] = to_string(cfg.mode);
    res["eps0"] = cfg.eps0;
    res["seed"] = cfg.seed;
    require_forward(run, cfg);

    // continuation needs every step, so the forward run is replayed at stride 1
    const Problem p = build(run, stage, cfg, 1);
    const Scenario& sc = p.scenario;
    stage = "replay";
    const TrajectoryRecord traj = simulate(sc);
    run.stage("replay", "ok");

    stage = "record";
    ObservationSet obs = record(traj, p.regions, cfg.setup.patch);
    if (cfg.eps0 > 0.0)
      obs = add_noise(sc.mesh.grid(), obs, cfg.eps0, cfg.seed);
    {
      std::ofstream f = run.open("observation.bin", true);
      write_observation(f, obs, sc.dt);
      std::ofstream j = run.open("observation.json");
      write_observation_sidecar(j, sc.mesh.grid(), obs);
    }
    run.stage("record", "ok", std::to_string(obs.data.node_count()) + " patch nodes");

    stage = "recover";
    const FrictionEstimate e = recover(sc, p.regions, obs, cfg.mode, &traj, cfg.recovery);
    run.stage("recover", "ok", e.outcome);

    stage = "write";
    const std::string tag = to_string(cfg.mode);
    {
      std::ofstream f = run.open("estimate_" + tag + ".csv");
      write_estimate_csv(f, e);
    }
    res["outcome"] = e.outcome;
    res["estimate_empty"] = !e.slipping;
    res["relative_error"] = e.slipping ? json(e.relative_error) : json(nullptr);
    res["coverage"] = e.coverage;
    res["inconsistent_directions"] = e.inconsistent;
    if (cfg.mode == RecoveryMode::FullInverse) {
      const ReconstructedField& c = e.continuation;
      const CollarError ce = collar_error(sc.mesh.grid(), c, traj, p.regions.n_delta_collar);
      res["continuation"] = {{"data_misfit", c.data_misfit},
                             {"zero_misfit", c.zero_misfit},
                             {"alpha", c.alpha},
                             {"iterations", c.iterations},
                             {"converged", c.converged},
                             {"collar_error", ce.collar},
                             {"full_error", ce.full}};
      res["traction"] = {{"misfit", e.traction_misfit}, {"iterations", e.traction_iterations}};
      std::ofstream j = run.open("reconstruction.json");
      write_reconstruction_sidecar(j, c);
    }
    write_invert_plots(run, e, tag);
    run.stage("write", "ok");
    return kExitOk;
  });
}

int cmd_sweep(const std::string& config_path, std::ostream& log) {
  Run run("sweep", config_path, log);
  std::string stage = "config";
  return guarded(run, stage, [&]() -> int {
    const RunConfig cfg = prepare(run, stage);
    require_forward(run, cfg);
    auto& res = run.manifest().results;
    res["levels"] = cfg.sweep_levels;
    res["seeds"] = cfg.sweep_seeds;

    const Problem p = build(run, stage, cfg, 1);
    const Scenario& sc = p.scenario;
    stage = "replay";
    const TrajectoryRecord traj = simulate(sc);
    const ObservationSet clean = record(traj, p.regions, cfg.setup.patch);
    run.stage("replay", "ok");

    stage = "sweep";
    const StabilityCurve curve =
        stability_sweep(sc, p.regions, clean, cfg.sweep_levels, cfg.sweep_seeds, cfg.recovery);
    json cells = json::array();
    Index ok = 0;
    for (const auto& c : curve.cells) {
      ok += std::isfinite(c.error);
      cells.push_back({{"eps0", c.eps0},
                       {"seed", c.seed},
                       {"error", std::isfinite(c.error) ? json(c.error) : json(nullptr)},
                       {"status", c.status}});
    }
    res["cells"] = cells;
    res["fitted_c"] = std::isfinite(curve.fitted_c) ? json(curve.fitted_c) : json(nullptr);
    res["exponent"] = curve.exponent;
    run.stage("sweep", ok > 0 ? "ok" : "failed",
              std::to_string(ok) + " of " + std::to_string(curve.cells.size()) + " cells");

    stage = "write";
    {
      std::ofstream f = run.open("stability.csv");
      write_curve_csv(f, curve);
    }
    {
      std::ofstream f = run.open("stability.svg");
      write_curve_svg(f, curve);
    }
    run.stage("write", "ok");
    return ok > 0 ? kExitOk : kExitNumerical;
  });
}

} // namespace tresca
