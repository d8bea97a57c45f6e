#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

#include "output.hpp"
#include "stosym/convergence.hpp"
#include "stosym/diagnostics.hpp"

#ifndef STOSYM_VERSION
#define STOSYM_VERSION "unknown"
#endif

namespace stosym::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ConfigError(where + ": seed must be a non-negative integer, got \"" + text + "\"");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(where + ": seed out of range");
  }
}

long whole_steps(double total, double dt, const std::string& key) {
  const double r = total / dt;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded)
    throw ConfigError(key + ": T / dt = " + format_double(r) + " is not a positive integer");
  return static_cast<long>(rounded);
}

double require_dt(const RunConfig& cfg) {
  if (!cfg.run.dt) throw ConfigError("run.dt: required by this command");
  return *cfg.run.dt;
}

SolverParams solver_params(const RunConfig& cfg) {
  SolverParams sp = cfg.solver;
  sp.require_truncated_noise = cfg.noise.truncate;
  return sp;
}

ojson meta_document(const std::string& command, const RunConfig& cfg, const ResolvedSeed& seed,
                    const CommandOptions& opts) {
  ojson meta;
  meta["tool"] = "stosym";
  meta["version"] = STOSYM_VERSION;
  meta["command"] = command;
  meta["master_seed"] = seed.value;
  meta["seed_source"] = seed.source;
  meta["threads"] = opts.threads;
  meta["flags"] = {{"paper_scale", opts.paper_scale}, {"no_truncate", opts.no_truncate}, {"plot", opts.plot}};
  meta["config"] = to_json(cfg);
  return meta;
}

struct Setup {
  RunConfig cfg;
  ResolvedSeed seed;
  Problem problem;
  fs::path dir;
};

Setup prepare(const CommandOptions& opts) {
  Setup s;
  s.cfg = effective_config(load_config(opts.config_path), opts, std::getenv("STOSYM_SEED"), s.seed);
  s.problem = build_problem(s.cfg);
  s.dir = s.cfg.run.output_dir;
  return s;
}

/// Runs fn(path) for path = 0..n-1 on `threads` workers and keeps results in path order.
template <typename Result>
std::vector<Result> for_each_path(long n, int threads, const std::function<Result(long)>& fn) {
  std::vector<Result> results(static_cast<std::size_t>(n));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long p = next++; p < n; p = next++) results[static_cast<std::size_t>(p)] = fn(p);
  };
  const int count = std::clamp<int>(threads, 1, static_cast<int>(std::max<long>(1, n)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  }
  return results;
}

struct PathRun {
  std::vector<StepRecord> records;
  std::string failure;
  int exit_code = kOk;
};

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

ojson fit_json(const LineFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}}; }

}  // namespace

ResolvedSeed resolve_seed(const std::optional<std::string>& flag, const char* env, std::uint64_t config_seed) {
  if (flag) return {parse_seed(*flag, "--seed"), "flag"};
  if (env && *env) return {parse_seed(env, "STOSYM_SEED"), "env"};
  return {config_seed, "config"};
}

RunConfig effective_config(RunConfig cfg, const CommandOptions& opts, const char* env_seed, ResolvedSeed& seed) {
  if (opts.threads < 1) throw ConfigError("--threads: must be >= 1");
  if (opts.paper_scale) {
    cfg.problem.n_cells = 512;
    cfg.run.n_paths = 500;
  }
  if (opts.no_truncate) cfg.noise.truncate = false;
  if (opts.output_dir) cfg.run.output_dir = *opts.output_dir;
  seed = resolve_seed(opts.seed, env_seed, cfg.run.master_seed);
  cfg.run.master_seed = seed.value;
  return cfg;
}

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = prepare(opts);
    const double dt = require_dt(s.cfg);
    const long steps = whole_steps(s.cfg.problem.final_time, dt, "run.dt");
    const std::string name = s.cfg.scheme.name == "both" ? "midpoint" : s.cfg.scheme.name;
    const SchemeSpec spec = build_scheme(s.cfg, name);
    GaussianStream stream(s.seed.value, 0);
    const auto records = integrate_path(s.problem.initial, spec, s.problem.nl, dt, steps, s.problem.noise, stream,
                                        solver_params(s.cfg), s.cfg.run.record_every);

    CsvTable table({"step", "time", "charge", "energy", "iterations"});
    for (const auto& r : records)
      table.add_row({std::to_string(r.step), format_double(r.time), format_double(r.charge), format_double(r.energy),
                     std::to_string(r.iterations)});
    write_text(s.dir / "trajectory.csv", table.str());

    ojson meta = meta_document("simulate", s.cfg, s.seed, opts);
    const double drift = charge_drift(records);
    const double e0 = records.front().energy;
    double energy_drift = 0.0;
    for (const auto& r : records) energy_drift = std::max(energy_drift, std::abs(r.energy - e0));
    if (e0 != 0.0) energy_drift /= std::abs(e0);
    meta["results"] = {{"scheme", name},
                       {"n_steps", steps},
                       {"max_charge_drift", drift},
                       {"max_energy_drift", energy_drift},
                       {"final_charge", records.back().charge},
                       {"final_energy", records.back().energy}};
    write_json(s.dir / "meta.json", meta);

    if (opts.plot) {
      PlotSeries charge{"charge", {}, {}}, energy{"energy", {}, {}};
      for (const auto& r : records) {
        charge.x.push_back(r.time);
        charge.y.push_back(r.charge);
        energy.x.push_back(r.time);
        energy.y.push_back(r.energy);
      }
      write_text(s.dir / "trajectory_charge.svg", render_svg({"Charge", "t", "charge"}, {charge}));
      write_text(s.dir / "trajectory_energy.svg", render_svg({"Energy", "t", "energy"}, {energy}));
    }
    out << "simulate: " << steps << " steps of " << name << ", max charge drift " << format_double(drift)
        << ", max energy drift " << format_double(energy_drift) << "\n";
    return int(kOk);
  });
}

int cmd_converge(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = prepare(opts);
    if (s.cfg.run.dt_list.empty()) throw ConfigError("run.dt_list: must contain at least one step size");
    if (s.cfg.scheme.name == "both") throw ConfigError("scheme.name: converge needs a single scheme");
    ConvergenceConfig cc;
    cc.dt_list = s.cfg.run.dt_list;
    cc.dt_ref = s.cfg.run.dt_ref;
    cc.n_paths = s.cfg.run.n_paths;
    cc.final_time = s.cfg.problem.final_time;
    cc.scheme = build_scheme(s.cfg, s.cfg.scheme.name);
    cc.solver = solver_params(s.cfg);
    cc.master_seed = s.seed.value;
    cc.threads = opts.threads;
    try {
      validate(cc);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("run: ") + e.what());
    }
    const ConvergenceProblem problem{s.problem.initial, s.problem.nl, s.problem.noise};
    const ConvergenceReport rep = s.cfg.run.oracle ? oracle_convergence(cc, problem) : run_convergence(cc, problem);

    CsvTable table({"dt", "rms_error", "n_paths", "failed_paths"});
    for (std::size_t i = 0; i < rep.rms_errors.size(); ++i)
      table.add_row({format_double(rep.dts[i]), format_double(rep.rms_errors[i]), std::to_string(rep.n_paths),
                     std::to_string(rep.failed_paths)});
    write_text(s.dir / "convergence.csv", table.str());

    ojson meta = meta_document("converge", s.cfg, s.seed, opts);
    ojson results;
    results["reference"] = s.cfg.run.oracle ? "exact" : "self";
    results["fit_status"] = rep.fit_status;
    if (rep.fit) {
      results["order"] = rep.fit->slope;
      results["intercept"] = rep.fit->intercept;
      results["order_stderr"] = rep.fit->stderr_slope;
    } else {
      results["order"] = nullptr;
    }
    results["rms_stderr"] = rep.rms_stderr;
    results["max_charge_drift"] = rep.max_charge_drift;
    results["failed_paths"] = rep.failed_paths;
    results["failures"] = rep.failures;
    meta["results"] = results;
    write_json(s.dir / "meta.json", meta);

    if (opts.plot && !rep.rms_errors.empty())
      write_text(s.dir / "convergence.svg", render_svg({"Mean-square error", "dt", "RMS error", true},
                                                      {{"scheme", rep.dts, rep.rms_errors}}));

    out << "converge: " << rep.n_paths << " paths, " << rep.failed_paths << " failed, order ";
    if (rep.fit)
      out << format_double(rep.fit->slope) << " +- " << format_double(rep.fit->stderr_slope);
    else
      out << "n/a (" << rep.fit_status << ")";
    out << "\n";
    for (const auto& f : rep.failures) err << f << "\n";
    return rep.failed_paths > 0 ? int(kNumericalFailure) : int(kOk);
  });
}

int cmd_conserve(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = prepare(opts);
    const double dt = require_dt(s.cfg);
    const long steps = whole_steps(s.cfg.problem.final_time, dt, "run.dt");
    const bool both = s.cfg.scheme.name == "both";
    const std::vector<std::string> names =
        both ? std::vector<std::string>{"midpoint", "nonsymplectic"} : std::vector<std::string>{s.cfg.scheme.name};
    const SolverParams sp = solver_params(s.cfg);
    const double predicted = predicted_energy_slope(s.problem.initial, s.problem.noise, s.problem.nl.epsilon);

    ojson meta = meta_document("conserve", s.cfg, s.seed, opts);
    ojson results;
    std::vector<PlotSeries> charge_plot, energy_plot;
    for (const std::string& name : names) {
      const SchemeSpec spec = build_scheme(s.cfg, name);
      const std::function<PathRun(long)> run_path = [&](long p) {
        PathRun pr;
        GaussianStream stream(s.seed.value, static_cast<std::uint64_t>(p));
        try {
          pr.records = integrate_path(s.problem.initial, spec, s.problem.nl, dt, steps, s.problem.noise, stream, sp,
                                      s.cfg.run.record_every);
          for (auto& r : pr.records) r.state = ComplexField();
        } catch (const NumericalError& e) {
          pr.failure = name + " path " + std::to_string(p) + ": " + e.what();
          pr.exit_code = kNumericalFailure;
        }
        return pr;
      };
      auto runs = for_each_path<PathRun>(s.cfg.run.n_paths, opts.threads, run_path);
      std::vector<std::vector<StepRecord>> paths;
      for (auto& r : runs) {
        if (r.exit_code != kOk) {
          err << "numerical failure: " << r.failure << "\n";
          return int(kNumericalFailure);
        }
        paths.push_back(std::move(r.records));
      }
      const EnsembleStats st = ensemble_stats(paths);

      CsvTable table({"time", "mean_charge", "mean_energy", "max_charge_drift"});
      for (std::size_t k = 0; k < st.times.size(); ++k)
        table.add_row({format_double(st.times[k]), format_double(st.mean_charge[k]), format_double(st.mean_energy[k]),
                       format_double(st.max_charge_drift[k])});
      write_text(s.dir / (both ? "ensemble_" + name + ".csv" : "ensemble.csv"), table.str());

      ojson r;
      r["n_paths"] = st.sample_count;
      r["max_charge_drift"] = st.max_charge_drift.back();
      r["initial_mean_charge"] = st.mean_charge.front();
      r["final_mean_charge"] = st.mean_charge.back();
      bool decreasing = st.mean_charge.size() > 1;
      for (std::size_t k = 1; k < st.mean_charge.size(); ++k) decreasing &= st.mean_charge[k] < st.mean_charge[k - 1];
      r["mean_charge_strictly_decreasing"] = decreasing;
      double energy_change = 0.0;
      const double e0 = st.mean_energy.front();
      for (double e : st.mean_energy) energy_change = std::max(energy_change, std::abs(e - e0));
      r["max_relative_energy_change"] = e0 != 0.0 ? energy_change / std::abs(e0) : energy_change;
      if (st.times.size() >= 3 && st.sample_count >= 2) {
        r["energy_fit"] = fit_json(averaged_energy_slope(st));
      } else {
        r["energy_fit"] = nullptr;
      }
      r["predicted_energy_slope"] = predicted;
      results[name] = r;
      charge_plot.push_back({name, st.times, st.mean_charge});
      energy_plot.push_back({name, st.times, st.mean_energy});
      out << "conserve: " << name << ", " << st.sample_count << " paths, mean charge "
          << format_double(st.mean_charge.front()) << " -> " << format_double(st.mean_charge.back())
          << ", max charge drift " << format_double(st.max_charge_drift.back()) << "\n";
    }
    meta["results"] = results;
    write_json(s.dir / "meta.json", meta);
    if (opts.plot) {
      write_text(s.dir / "ensemble_charge.svg", render_svg({"Mean charge", "t", "charge"}, charge_plot));
      write_text(s.dir / "ensemble_energy.svg", render_svg({"Mean energy", "t", "energy"}, energy_plot));
    }
    return int(kOk);
  });
}

int cmd_symplectic_check(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = prepare(opts);
    if (s.problem.grid.interior() > kMaxJacobianInterior)
      throw ConfigError("problem.n_cells: symplectic-check supports at most " +
                        std::to_string(kMaxJacobianInterior + 1) + " cells, got " +
                        std::to_string(s.cfg.problem.n_cells));
    if (s.cfg.scheme.name == "both") throw ConfigError("scheme.name: symplectic-check needs a single scheme");
    const double dt = require_dt(s.cfg);
    const SchemeSpec spec = build_scheme(s.cfg, s.cfg.scheme.name);
    const SolverParams sp = solver_params(s.cfg);

    ojson results;
    bool pass = true;
    if (spec.scheme == Scheme::nonsymplectic) {
      out << "tableau defect: n/a (backward Euler comparison scheme)\n";
      results["tableau_defect"] = nullptr;
    } else {
      const Tableau tab = spec.scheme == Scheme::midpoint ? midpoint_tableau() : spec.tableau;
      const SymplecticCheck tc = is_symplectic(tab, s.cfg.check.tableau_tol);
      pass &= tc.symplectic;
      out << "tableau defect: " << format_double(tc.max_defect) << " (tol " << format_double(s.cfg.check.tableau_tol)
          << ") " << (tc.symplectic ? "PASS" : "FAIL") << "\n";
      results["tableau_defect"] = tc.max_defect;
    }

    GaussianStream stream(s.seed.value, 0);
    const WienerIncrement incr =
        prepare_increment(s.problem.noise, sample_increment(s.problem.noise, dt, stream), spec);
    const double defect = symplectic_defect(s.problem.initial, spec, s.problem.nl, dt, 0.0, incr, sp);
    const bool jac_ok = defect <= s.cfg.check.jacobian_tol;
    pass &= jac_ok;
    out << "jacobian defect: " << format_double(defect) << " (tol " << format_double(s.cfg.check.jacobian_tol) << ") "
        << (jac_ok ? "PASS" : "FAIL") << "\n";
    results["jacobian_defect"] = defect;
    results["pass"] = pass;

    ojson meta = meta_document("symplectic-check", s.cfg, s.seed, opts);
    meta["results"] = results;
    write_json(s.dir / "meta.json", meta);
    return pass ? int(kOk) : int(kThresholdFailure);
  });
}

}  // namespace stosym::cli
