#include "tresca/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "tresca/expression.hpp"

namespace tresca {

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::size_t line_of(const toml::node& n) { return std::size_t(n.source().begin.line); }

class Reader {
public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node& n, const std::string& what) const {
    throw ConfigError(source_, line_of(n), what);
  }

  void check_sections(const std::map<std::string, std::set<std::string>>& known) const {
    for (const auto& [name, node] : root_) {
      const auto it = known.find(std::string(name.str()));
      if (it == known.end())
        fail(node, "unknown section [" + std::string(name.str()) + "]");
      const toml::table* t = node.as_table();
      if (!t)
        fail(node, "'" + std::string(name.str()) + "' must be a section");
      for (const auto& [key, value] : *t)
        if (!it->second.count(std::string(key.str())))
          fail(value, "unknown key '" + std::string(key.str()) + "' in [" + it->first + "]");
    }
  }

  const toml::node* find(const char* section, const char* key) const {
    const toml::table* t = root_[section].as_table();
    return t ? t->get(key) : nullptr;
  }

  void number(const char* section, const char* key, double& out) const {
    if (const toml::node* n = find(section, key)) {
      if (auto v = n->value<double>())
        out = *v;
      else
        fail(*n, std::string(key) + " must be a number");
    }
  }

  void positive(const char* section, const char* key, double& out) const {
    number(section, key, out);
    if (const toml::node* n = find(section, key); n && !(out > 0.0))
      fail(*n, std::string(key) + " must be positive");
  }

  template <typename I>
  void integer(const char* section, const char* key, I& out, long long lo) const {
    if (const toml::node* n = find(section, key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v)
        fail(*n, std::string(key) + " must be an integer");
      if (*v < lo)
        fail(*n, std::string(key) + " must be at least " + std::to_string(lo));
      out = I(*v);
    }
  }

  void boolean(const char* section, const char* key, bool& out) const {
    if (const toml::node* n = find(section, key)) {
      if (auto v = n->value_exact<bool>())
        out = *v;
      else
        fail(*n, std::string(key) + " must be true or false");
    }
  }

  void string(const char* section, const char* key, std::string& out) const {
    if (const toml::node* n = find(section, key)) {
      if (auto v = n->value_exact<std::string>())
        out = *v;
      else
        fail(*n, std::string(key) + " must be a string");
    }
  }

  void numbers(const char* section, const char* key, std::vector<double>& out) const {
    if (const toml::node* n = find(section, key)) {
      const toml::array* a = n->as_array();
      if (!a)
        fail(*n, std::string(key) + " must be an array of numbers");
      out.clear();
      for (const toml::node& e : *a) {
        const auto v = e.value<double>();
        if (!v)
          fail(e, std::string(key) + " must be an array of numbers");
        out.push_back(*v);
      }
    }
  }

  void expression(const char* section, const char* key, std::string& text) const {
    string(section, key, text);
    if (const toml::node* n = find(section, key)) {
      try {
        (void)Expression::parse(text);
      } catch (const ExpressionError& e) {
        fail(*n, std::string(key) + ": " + e.what());
      }
    }
  }

  const std::string& source() const { return source_; }

private:
  const toml::table& root_;
  std::string source_;
};

FaultFunction to_function(const std::string& text) {
  const Expression e = Expression::parse(text);
  return [e](double x, double t) { return e(x, t); };
}

} // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source, std::size_t(e.source().begin.line), std::string(e.description()));
  }
  const Reader r(root, source);
  r.check_sections({
      {"scenario",
       {"output", "cells", "extent", "half_window", "dt", "steps", "snapshot_stride", "c0", "c1",
        "normal", "prestress", "source_amplitude", "source_cx", "source_wx", "source_cy",
        "source_wy", "source_period", "source_ramp"}},
      {"material", {"rho", "lambda", "mu"}},
      {"fault", {"y", "x0", "x1"}},
      {"friction", {"coefficient", "normal_traction"}},
      {"observation", {"patch", "collar_r0", "delta", "eps0", "seed"}},
      {"inversion",
       {"mode", "alpha_ladder", "max_iterations", "tolerance", "discrepancy_factor",
        "traction_alpha", "traction_iterations", "traction_tolerance", "traction_scale",
        "window_margin", "accept_unconverged"}},
      {"sweep", {"levels", "seeds"}},
  });

  RunConfig c;
  c.source = source;
  c.hash = content_hash(text);
  RuptureSetup& s = c.setup;

  r.string("scenario", "output", c.output);
  r.integer("scenario", "cells", s.cells, 3);
  r.positive("scenario", "extent", s.extent);
  r.positive("scenario", "half_window", s.half_window);
  r.number("scenario", "dt", s.dt);
  r.integer("scenario", "steps", s.steps, 1);
  r.integer("scenario", "snapshot_stride", s.snapshot_stride, 1);
  r.positive("scenario", "c0", s.c0);
  r.positive("scenario", "c1", s.c1);
  if (const toml::node* n = r.find("scenario", "normal")) {
    std::string mode;
    r.string("scenario", "normal", mode);
    if (mode == "traction")
      s.normal = NormalCondition::PrescribedTraction;
    else if (mode == "no-opening")
      s.normal = NormalCondition::NoOpening;
    else
      r.fail(*n, "normal must be \"traction\" or \"no-opening\"");
  }
  r.boolean("scenario", "prestress", s.prestress);
  r.number("scenario", "source_amplitude", s.source_amplitude);
  r.number("scenario", "source_cx", s.source_cx);
  r.positive("scenario", "source_wx", s.source_wx);
  r.number("scenario", "source_cy", s.source_cy);
  r.positive("scenario", "source_wy", s.source_wy);
  r.number("scenario", "source_period", s.source_period);
  r.number("scenario", "source_ramp", s.source_ramp);

  r.positive("material", "rho", s.rho);
  r.positive("material", "lambda", s.lambda);
  r.positive("material", "mu", s.mu);

  r.number("fault", "y", s.fault_y);
  r.number("fault", "x0", s.fault_x0);
  r.number("fault", "x1", s.fault_x1);
  if (const toml::node* n = r.find("fault", "x1"); n && !(s.fault_x1 > s.fault_x0))
    r.fail(*n, "fault x1 must exceed x0");

  r.expression("friction", "coefficient", c.friction_text);
  r.expression("friction", "normal_traction", c.normal_text);
  if (!c.friction_text.empty())
    s.friction_coefficient = to_function(c.friction_text);
  if (!c.normal_text.empty())
    s.normal_traction = to_function(c.normal_text);

  if (const toml::node* n = r.find("observation", "patch")) {
    const toml::array* a = n->as_array();
    if (!a || a->empty())
      r.fail(*n, "patch must be a non-empty array of [x0, x1, y0, y1] rectangles");
    s.patch.clear();
    for (const toml::node& e : *a) {
      const toml::array* q = e.as_array();
      std::vector<double> v;
      if (q)
        for (const toml::node& x : *q)
          if (auto d = x.value<double>())
            v.push_back(*d);
      if (!q || v.size() != 4 || q->size() != 4)
        r.fail(e, "patch rectangles are [x0, x1, y0, y1]");
      if (!(v[1] > v[0] && v[3] > v[2]))
        r.fail(e, "patch rectangle has non-positive extent");
      s.patch.push_back(Rect{v[0], v[1], v[2], v[3]});
    }
  }
  r.positive("observation", "collar_r0", s.collar_r0);
  r.number("observation", "delta", s.delta);
  if (const toml::node* n = r.find("observation", "delta"); n && s.delta < 0.0)
    r.fail(*n, "delta must be non-negative (0 means h)");
  r.number("observation", "eps0", c.eps0);
  if (const toml::node* n = r.find("observation", "eps0"); n && c.eps0 < 0.0)
    r.fail(*n, "eps0 must be non-negative");
  r.integer("observation", "seed", c.seed, 0);

  if (const toml::node* n = r.find("inversion", "mode")) {
    std::string mode;
    r.string("inversion", "mode", mode);
    try {
      c.mode = parse_recovery_mode(mode);
    } catch (const InvalidArgument& e) {
      r.fail(*n, e.what());
    }
  }
  RecoveryOptions& o = c.recovery;
  r.numbers("inversion", "alpha_ladder", o.continuation.alpha_ladder);
  r.integer("inversion", "max_iterations", o.continuation.max_iterations, 1);
  r.positive("inversion", "tolerance", o.continuation.tolerance);
  r.positive("inversion", "discrepancy_factor", o.continuation.discrepancy_factor);
  r.numbers("inversion", "traction_alpha", o.traction_alpha);
  r.integer("inversion", "traction_iterations", o.traction_iterations, 1);
  r.positive("inversion", "traction_tolerance", o.traction_tolerance);
  r.positive("inversion", "traction_scale", o.traction_scale);
  r.number("inversion", "window_margin", o.window_margin);
  if (const toml::node* n = r.find("inversion", "window_margin"); n && o.window_margin < 0.0)
    r.fail(*n, "window_margin must be non-negative");
  r.boolean("inversion", "accept_unconverged", o.accept_unconverged);
  for (const char* key : {"alpha_ladder", "traction_alpha"})
    if (const toml::node* n = r.find("inversion", key)) {
      const auto& v = std::string(key) == "alpha_ladder" ? o.continuation.alpha_ladder : o.traction_alpha;
      if (v.empty())
        r.fail(*n, std::string(key) + " must not be empty");
      for (double a : v)
        if (!(a > 0.0))
          r.fail(*n, std::string(key) + " entries must be positive");
    }

  r.numbers("sweep", "levels", c.sweep_levels);
  if (const toml::node* n = r.find("sweep", "seeds")) {
    const toml::array* a = n->as_array();
    if (!a || a->empty())
      r.fail(*n, "seeds must be a non-empty array of integers");
    c.sweep_seeds.clear();
    for (const toml::node& e : *a) {
      const auto v = e.value_exact<std::int64_t>();
      if (!v || *v < 0)
        r.fail(e, "seeds must be non-negative integers");
      c.sweep_seeds.push_back(std::uint64_t(*v));
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

} // namespace tresca
