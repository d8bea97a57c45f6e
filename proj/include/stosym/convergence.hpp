#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosym/integrator.hpp"

namespace stosym {

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Raised when a log-log fit sees a zero or negative error.
class DegenerateErrors : public std::invalid_argument {
 public:
  DegenerateErrors() : std::invalid_argument("degenerate errors: log-log fit needs positive errors") {}
};

/// Ordinary least squares of log2(error) against log2(dt).
OrderFit fit_order(const std::vector<double>& dts, const std::vector<double>& errors);

struct ConvergenceConfig {
  std::vector<double> dt_list;
  double dt_ref = 0.0;
  long n_paths = 1;
  double final_time = 0.25;
  SchemeSpec scheme;
  SolverParams solver;
  std::uint64_t master_seed = 0;
  /// Paths use rng streams first_path .. first_path + n_paths - 1.
  long first_path = 0;
  int threads = 1;
};

/// Throws std::invalid_argument unless dt_ref divides every dt and every dt divides T.
void validate(const ConvergenceConfig& cfg);

struct ConvergenceProblem {
  ComplexField initial;
  Nonlinearity nl;
  NoiseModel noise;
};

struct ConvergenceReport {
  std::vector<double> dts;
  std::vector<double> rms_errors;
  /// Standard error of each RMS estimate (delta method on the mean squared error).
  std::vector<double> rms_stderr;
  std::optional<OrderFit> fit;
  std::string fit_status;
  long n_paths = 0;
  long failed_paths = 0;
  std::vector<std::string> failures;
  /// Largest relative charge drift seen over every step of every successful path.
  double max_charge_drift = 0.0;
};

/**
 * Strong error against a self-reference solution at dt_ref driven by the same
 * Brownian path: each path draws its fine increments once and every coarse
 * increment is the sum of the fine ones it covers.
 */
ConvergenceReport run_convergence(const ConvergenceConfig& cfg, const ConvergenceProblem& problem);

/// As run_convergence, measured against exact_phase_solution on each path's W(T).
ConvergenceReport oracle_convergence(const ConvergenceConfig& cfg, const ConvergenceProblem& problem);

}  // namespace stosym
