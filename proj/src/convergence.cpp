#include "stosym/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace stosym {

OrderFit fit_order(const std::vector<double>& dts, const std::vector<double>& errors) {
  if (dts.size() != errors.size()) throw std::invalid_argument("fit_order: length mismatch");
  if (dts.size() < 2) throw std::invalid_argument("fit_order: need at least two points");
  for (double d : dts)
    if (!(d > 0.0)) throw std::invalid_argument("fit_order: step sizes must be positive");
  for (double e : errors)
    if (!(e > 0.0)) throw DegenerateErrors();
  const std::size_t n = dts.size();
  std::vector<double> x(n), y(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log2(dts[i]);
    y[i] = std::log2(errors[i]);
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_order: all step sizes are equal");
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      sse += r * r;
    }
    fit.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

namespace {

long integer_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) throw std::invalid_argument(what);
  return static_cast<long>(rounded);
}

struct PathResult {
  bool ok = true;
  std::string failure;
  std::vector<double> squared_errors;
  double max_charge_drift = 0.0;
};

class PathRunner {
 public:
  PathRunner(const ConvergenceConfig& cfg, const ConvergenceProblem& problem, bool oracle)
      : cfg_(cfg), problem_(problem), oracle_(oracle), n_ref_(integer_ratio(cfg.final_time, cfg.dt_ref, "T / dt_ref")) {
    c0_ = discrete_charge(problem.initial);
  }

  PathResult run(long path) const {
    PathResult res;
    GaussianStream stream(cfg_.master_seed, static_cast<std::uint64_t>(cfg_.first_path + path));
    const NoiseModel& noise = problem_.noise;
    const double root = std::sqrt(cfg_.dt_ref);
    Eigen::MatrixXd fine(noise.mode_count(), n_ref_);
    for (long n = 0; n < n_ref_; ++n)
      for (Index l = 0; l < noise.mode_count(); ++l) fine(l, n) = root * stream.next();

    try {
      ComplexField target;
      if (oracle_) {
        double w = 0.0;
        for (long n = 0; n < n_ref_; ++n) w += noise.mode_count() > 0 ? fine(0, n) : 0.0;
        target = exact_phase_solution(problem_.initial, problem_.nl, noise, w, cfg_.final_time);
      } else {
        target = integrate(fine, 1, cfg_.dt_ref, res);
      }
      for (double dt : cfg_.dt_list) {
        const long r = integer_ratio(dt, cfg_.dt_ref, "dt / dt_ref");
        const ComplexField coarse = integrate(fine, r, dt, res);
        res.squared_errors.push_back(dx() * (coarse.values - target.values).squaredNorm());
      }
    } catch (const NumericalError& e) {
      res.ok = false;
      res.failure = "path " + std::to_string(cfg_.first_path + path) + ": " + e.what();
    }
    return res;
  }

 private:
  double dx() const { return problem_.initial.grid.dx; }

  ComplexField integrate(const Eigen::MatrixXd& fine, long r, double dt, PathResult& res) const {
    const long steps = n_ref_ / r;
    ComplexField state = problem_.initial;
    for (long n = 0; n < steps; ++n) {
      const WienerIncrement incr =
          prepare_increment(problem_.noise, sum_increments(problem_.noise, fine, n * r, r, dt), cfg_.scheme);
      try {
        state = advance(state, cfg_.scheme, problem_.nl, dt, static_cast<double>(n) * dt, incr, cfg_.solver).state;
      } catch (const NumericalError& e) {
        throw e.at_step(n + 1);
      }
      const double drift = std::abs(discrete_charge(state) - c0_);
      res.max_charge_drift = std::max(res.max_charge_drift, c0_ != 0.0 ? drift / c0_ : drift);
    }
    return state;
  }

  const ConvergenceConfig& cfg_;
  const ConvergenceProblem& problem_;
  bool oracle_;
  long n_ref_;
  double c0_ = 0.0;
};

ConvergenceReport run_paths(const ConvergenceConfig& cfg, const ConvergenceProblem& problem, bool oracle) {
  validate(cfg);
  validate(cfg.solver);
  if (!(problem.noise.grid == problem.initial.grid)) throw std::invalid_argument("noise model lives on a different grid");
  const PathRunner runner(cfg, problem, oracle);

  std::vector<PathResult> results(static_cast<std::size_t>(cfg.n_paths));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long p = next++; p < cfg.n_paths; p = next++) results[static_cast<std::size_t>(p)] = runner.run(p);
  };
  const int threads = std::clamp<int>(cfg.threads, 1, static_cast<int>(std::max<long>(1, cfg.n_paths)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ConvergenceReport report;
  report.dts = cfg.dt_list;
  report.n_paths = cfg.n_paths;
  const std::size_t k = cfg.dt_list.size();
  std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
  long good = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++report.failed_paths;
      report.failures.push_back(r.failure);
      continue;
    }
    ++good;
    report.max_charge_drift = std::max(report.max_charge_drift, r.max_charge_drift);
    for (std::size_t i = 0; i < k; ++i) {
      sum[i] += r.squared_errors[i];
      sum_sq[i] += r.squared_errors[i] * r.squared_errors[i];
    }
  }
  if (good == 0) {
    report.fit_status = "all paths failed";
    return report;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double mean = sum[i] / static_cast<double>(good);
    const double rms = std::sqrt(mean);
    double se = 0.0;
    if (good > 1 && rms > 0.0) {
      const double var = std::max(0.0, (sum_sq[i] - good * mean * mean) / static_cast<double>(good - 1));
      se = std::sqrt(var / static_cast<double>(good)) / (2.0 * rms);
    }
    report.rms_errors.push_back(rms);
    report.rms_stderr.push_back(se);
  }
  try {
    report.fit = fit_order(report.dts, report.rms_errors);
    report.fit_status = "ok";
  } catch (const DegenerateErrors& e) {
    report.fit_status = e.what();
  } catch (const std::invalid_argument& e) {
    report.fit_status = e.what();
  }
  return report;
}

}  // namespace

void validate(const ConvergenceConfig& cfg) {
  if (cfg.dt_list.empty()) throw std::invalid_argument("convergence: dt_list is empty");
  if (!(cfg.dt_ref > 0.0)) throw std::invalid_argument("convergence: dt_ref must be positive");
  if (!(cfg.final_time > 0.0)) throw std::invalid_argument("convergence: final time must be positive");
  if (cfg.n_paths < 1) throw std::invalid_argument("convergence: n_paths must be >= 1");
  integer_ratio(cfg.final_time, cfg.dt_ref, "convergence: dt_ref does not divide T");
  for (double dt : cfg.dt_list) {
    if (!(dt > 0.0)) throw std::invalid_argument("convergence: step sizes must be positive");
    integer_ratio(dt, cfg.dt_ref, "convergence: dt_ref does not divide every dt");
    integer_ratio(cfg.final_time, dt, "convergence: a dt does not divide T");
  }
}

ConvergenceReport run_convergence(const ConvergenceConfig& cfg, const ConvergenceProblem& problem) {
  return run_paths(cfg, problem, false);
}

ConvergenceReport oracle_convergence(const ConvergenceConfig& cfg, const ConvergenceProblem& problem) {
  if (problem.noise.kind != NoiseKind::constant) throw std::invalid_argument("oracle convergence needs constant-mode noise");
  if (problem.nl.kind != NonlinearityKind::linear) throw std::invalid_argument("oracle convergence needs Psi' = 0");
  return run_paths(cfg, problem, true);
}

}  // namespace stosym
