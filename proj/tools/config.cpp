#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "expression.hpp"

namespace stosym::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

double read_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return evaluate_constant(v.get<std::string>());
    } catch (const ExpressionError& e) {
      fail(path, e.what());
    }
  }
  fail(path, "expected a number or a constant expression string");
}

long read_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long>();
  const double d = read_number(v, path);
  if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 9.0e15) fail(path, "expected an integer");
  return static_cast<long>(d);
}

/// Walks one JSON object, remembering which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = read_number(*v, at(key));
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) out = read_number(*v, at(key));
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) out = static_cast<Int>(read_integer(*v, at(key)));
  }

  void seed(const std::string& key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    if (v->is_number_unsigned()) {
      out = v->get<std::uint64_t>();
    } else if (v->is_string()) {
      const std::string s = v->get<std::string>();
      if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        fail(at(key), "expected a non-negative integer");
      try {
        out = std::stoull(s);
      } catch (const std::exception&) {
        fail(at(key), "seed out of range");
      }
    } else {
      fail(at(key), "expected a non-negative integer");
    }
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    out = v->get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) fail(at(key), "expected a string");
    out = v->get<std::string>();
  }

  void choice(const std::string& key, std::string& out, std::initializer_list<const char*> allowed) {
    string(key, out);
    for (const char* a : allowed)
      if (out == a) return;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
    fail(at(key), "unknown value \"" + out + "\", expected " + list);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::VectorXd read_vector(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Index>(i)) = read_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Eigen::MatrixXd read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row = path + "[" + std::to_string(i) + "]";
    const Eigen::VectorXd r = read_vector(v[i], row);
    if (static_cast<std::size_t>(r.size()) != cols) fail(row, "rows have different lengths");
    out.row(static_cast<Index>(i)) = r.transpose();
  }
  return out;
}

Tableau read_tableau(const json& v, const std::string& path) {
  Section s(v, path);
  Tableau t;
  const json* a0 = s.find("a0");
  const json* a1 = s.find("a1");
  const json* b0 = s.find("b0");
  const json* b1 = s.find("b1");
  s.finish();
  if (!a0 || !a1 || !b0 || !b1) fail(path, "needs a0, a1, b0 and b1");
  t.b0 = read_vector(*b0, s.at("b0"));
  t.b1 = read_vector(*b1, s.at("b1"));
  t.a0 = read_matrix(*a0, s.at("a0"));
  t.a1 = read_matrix(*a1, s.at("a1"));
  t.stages = static_cast<int>(t.b0.size());
  try {
    validate(t);
  } catch (const TableauError& e) {
    fail(path, e.what());
  }
  return t;
}

void check_expression(const std::string& text, std::vector<std::string> vars, const std::string& path) {
  try {
    Expression::parse(text, std::move(vars));
  } catch (const ExpressionError& e) {
    fail(path, e.what());
  }
}

void validate_config(const RunConfig& c) {
  const auto& p = c.problem;
  if (!(p.half_width > 0.0) || !std::isfinite(p.half_width)) fail("problem.L", "must be positive");
  if (p.n_cells < 3) fail("problem.n_cells", "must be >= 3");
  if (!(p.final_time > 0.0) || !std::isfinite(p.final_time)) fail("problem.T", "must be positive");
  if (!std::isfinite(p.epsilon)) fail("problem.epsilon", "must be finite");
  if (p.nonlinearity == "custom") {
    check_expression(p.custom.psi, {"s", "x"}, "problem.custom.psi");
    check_expression(p.custom.psi_prime, {"s", "x", "t"}, "problem.custom.psi_prime");
    check_expression(p.custom.psi_double_prime, {"s", "x", "t"}, "problem.custom.psi_double_prime");
  }
  if (p.initial == "expression") {
    check_expression(p.initial_real, {"x"}, "problem.initial_expression.real");
    check_expression(p.initial_imag, {"x"}, "problem.initial_expression.imag");
  }
  const auto& n = c.noise;
  if (n.modes < 0) fail("noise.M", "must be >= 0");
  if (!(n.decay_p >= 0.0)) fail("noise.decay_p", "must be >= 0");
  if (!std::isfinite(n.amplitude)) fail("noise.amplitude", "must be finite");
  if (n.truncate_k < 1) fail("noise.truncate_k", "must be >= 1");
  if (!(c.solver.fp_tol > 0.0)) fail("solver.fp_tol", "must be positive");
  if (c.solver.max_iter < 1) fail("solver.max_iter", "must be >= 1");
  if (!(c.solver.divergence_guard > 0.0)) fail("solver.divergence_guard", "must be positive");
  if (!(c.check.tableau_tol >= 0.0)) fail("check.tableau_tol", "must be >= 0");
  if (!(c.check.jacobian_tol >= 0.0)) fail("check.jacobian_tol", "must be >= 0");
  const auto& r = c.run;
  if (r.dt && !(*r.dt > 0.0)) fail("run.dt", "must be positive");
  for (std::size_t i = 0; i < r.dt_list.size(); ++i)
    if (!(r.dt_list[i] > 0.0)) fail("run.dt_list[" + std::to_string(i) + "]", "must be positive");
  if (!(r.dt_ref > 0.0)) fail("run.dt_ref", "must be positive");
  if (r.n_paths < 1) fail("run.n_paths", "must be >= 1");
  if (r.record_every < 1) fail("run.record_every", "must be >= 1");
  if (r.output_dir.empty()) fail("run.output_dir", "must not be empty");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Section root(doc, "");

  if (const json* v = root.find("problem")) {
    Section s(*v, "problem");
    s.number("L", c.problem.half_width);
    s.integer("n_cells", c.problem.n_cells);
    s.number("T", c.problem.final_time);
    s.number("epsilon", c.problem.epsilon);
    s.choice("nonlinearity", c.problem.nonlinearity, {"cubic", "linear", "custom"});
    if (const json* cv = s.find("custom")) {
      Section cs(*cv, "problem.custom");
      cs.string("psi", c.problem.custom.psi);
      cs.string("psi_prime", c.problem.custom.psi_prime);
      cs.string("psi_double_prime", c.problem.custom.psi_double_prime);
      cs.finish();
    }
    s.choice("initial", c.problem.initial, {"sin_pi", "expression"});
    if (const json* iv = s.find("initial_expression")) {
      Section is(*iv, "problem.initial_expression");
      is.string("real", c.problem.initial_real);
      is.string("imag", c.problem.initial_imag);
      is.finish();
    }
    s.finish();
  }

  if (const json* v = root.find("noise")) {
    Section s(*v, "noise");
    s.choice("kind", c.noise.kind, {"sine", "constant"});
    s.integer("M", c.noise.modes);
    s.number("decay_p", c.noise.decay_p);
    s.number("amplitude", c.noise.amplitude);
    s.integer("truncate_k", c.noise.truncate_k);
    s.boolean("truncate", c.noise.truncate);
    s.finish();
  }

  if (const json* v = root.find("scheme")) {
    Section s(*v, "scheme");
    s.choice("name", c.scheme.name, {"midpoint", "srk", "nonsymplectic", "both"});
    if (const json* tv = s.find("tableau")) c.scheme.tableau = read_tableau(*tv, "scheme.tableau");
    s.choice("comparison_noise", c.scheme.comparison_noise, {"additive", "multiplicative"});
    s.finish();
  }

  if (const json* v = root.find("solver")) {
    Section s(*v, "solver");
    s.number("fp_tol", c.solver.fp_tol);
    s.integer("max_iter", c.solver.max_iter);
    s.number("divergence_guard", c.solver.divergence_guard);
    s.finish();
  }

  if (const json* v = root.find("check")) {
    Section s(*v, "check");
    s.number("tableau_tol", c.check.tableau_tol);
    s.number("jacobian_tol", c.check.jacobian_tol);
    s.finish();
  }

  if (const json* v = root.find("run")) {
    Section s(*v, "run");
    s.optional_number("dt", c.run.dt);
    if (const json* lv = s.find("dt_list")) {
      if (!lv->is_array()) fail("run.dt_list", "expected an array");
      for (std::size_t i = 0; i < lv->size(); ++i)
        c.run.dt_list.push_back(read_number((*lv)[i], "run.dt_list[" + std::to_string(i) + "]"));
    }
    s.number("dt_ref", c.run.dt_ref);
    s.integer("n_paths", c.run.n_paths);
    s.seed("master_seed", c.run.master_seed);
    s.integer("record_every", c.run.record_every);
    s.string("output_dir", c.run.output_dir);
    s.boolean("oracle", c.run.oracle);
    s.finish();
  }

  root.finish();
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(doc);
}

namespace {

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto a = nlohmann::ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto& p = j["problem"];
  p["L"] = c.problem.half_width;
  p["n_cells"] = c.problem.n_cells;
  p["T"] = c.problem.final_time;
  p["epsilon"] = c.problem.epsilon;
  p["nonlinearity"] = c.problem.nonlinearity;
  if (c.problem.nonlinearity == "custom")
    p["custom"] = {{"psi", c.problem.custom.psi},
                   {"psi_prime", c.problem.custom.psi_prime},
                   {"psi_double_prime", c.problem.custom.psi_double_prime}};
  p["initial"] = c.problem.initial;
  if (c.problem.initial == "expression")
    p["initial_expression"] = {{"real", c.problem.initial_real}, {"imag", c.problem.initial_imag}};

  auto& n = j["noise"];
  n["kind"] = c.noise.kind;
  n["M"] = c.noise.modes;
  n["decay_p"] = c.noise.decay_p;
  n["amplitude"] = c.noise.amplitude;
  n["truncate_k"] = c.noise.truncate_k;
  n["truncate"] = c.noise.truncate;

  auto& s = j["scheme"];
  s["name"] = c.scheme.name;
  if (c.scheme.tableau) {
    const Tableau& t = *c.scheme.tableau;
    s["tableau"] = {{"a0", matrix_json(t.a0)}, {"a1", matrix_json(t.a1)}, {"b0", vector_json(t.b0)},
                    {"b1", vector_json(t.b1)}};
  }
  s["comparison_noise"] = c.scheme.comparison_noise;

  j["solver"] = {{"fp_tol", c.solver.fp_tol},
                 {"max_iter", c.solver.max_iter},
                 {"divergence_guard", c.solver.divergence_guard}};
  j["check"] = {{"tableau_tol", c.check.tableau_tol}, {"jacobian_tol", c.check.jacobian_tol}};

  auto& r = j["run"];
  if (c.run.dt) r["dt"] = *c.run.dt;
  if (!c.run.dt_list.empty()) r["dt_list"] = c.run.dt_list;
  r["dt_ref"] = c.run.dt_ref;
  r["n_paths"] = c.run.n_paths;
  r["master_seed"] = c.run.master_seed;
  r["record_every"] = c.run.record_every;
  r["output_dir"] = c.run.output_dir;
  r["oracle"] = c.run.oracle;
  return j;
}

namespace {

Nonlinearity custom_nonlinearity(const CustomPotential& cp, double epsilon) {
  const Expression psi = Expression::parse(cp.psi, {"s", "x"});
  const Expression d1 = Expression::parse(cp.psi_prime, {"s", "x", "t"});
  const Expression d2 = Expression::parse(cp.psi_double_prime, {"s", "x", "t"});
  Nonlinearity nl;
  nl.psi = [psi](double s, double x) { return psi({s, x}); };
  nl.psi_prime = [d1](double s, double x, double t) { return d1({s, x, t}); };
  nl.psi_double_prime = [d2](double s, double x, double t) { return d2({s, x, t}); };
  nl.epsilon = epsilon;
  nl.kind = NonlinearityKind::custom;
  return nl;
}

}  // namespace

Problem build_problem(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  Problem out;
  out.grid = build_grid(p.half_width, p.n_cells);
  if (p.initial == "sin_pi") {
    out.initial = sample<Complex>(out.grid, [](double x) { return std::sin(std::numbers::pi * x); });
  } else {
    const Expression re = Expression::parse(p.initial_real, {"x"});
    const Expression im = Expression::parse(p.initial_imag, {"x"});
    out.initial = sample<Complex>(out.grid, [&](double x) { return Complex(re({x}), im({x})); });
    if (!out.initial.all_finite()) fail("problem.initial_expression", "evaluates to a non-finite value");
  }
  if (p.nonlinearity == "cubic")
    out.nl = Nonlinearity::cubic(p.epsilon);
  else if (p.nonlinearity == "linear")
    out.nl = Nonlinearity::linear(p.epsilon);
  else
    out.nl = custom_nonlinearity(p.custom, p.epsilon);
  if (cfg.noise.kind == "sine")
    out.noise = build_sine_noise(out.grid, cfg.noise.modes, cfg.noise.decay_p);
  else
    out.noise = build_constant_noise(out.grid, cfg.noise.amplitude);
  return out;
}

SchemeSpec build_scheme(const RunConfig& cfg, const std::string& name) {
  SchemeSpec spec;
  if (name == "midpoint") {
    spec.scheme = Scheme::midpoint;
  } else if (name == "srk") {
    spec.scheme = Scheme::srk;
    spec.tableau = cfg.scheme.tableau.value_or(midpoint_tableau());
  } else if (name == "nonsymplectic") {
    spec.scheme = Scheme::nonsymplectic;
  } else {
    fail("scheme.name", "\"" + name + "\" does not name a single scheme");
  }
  spec.comparison_noise =
      cfg.scheme.comparison_noise == "multiplicative" ? ComparisonNoise::multiplicative : ComparisonNoise::additive;
  spec.truncate = cfg.noise.truncate;
  spec.truncate_k = cfg.noise.truncate_k;
  return spec;
}

}  // namespace stosym::cli
