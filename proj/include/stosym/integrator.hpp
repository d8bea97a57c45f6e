#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosym/field.hpp"
#include "stosym/noise.hpp"
#include "stosym/tableau.hpp"

namespace stosym {

enum class NonlinearityKind { linear, cubic, custom };

/**
 * Nonlinear potential Psi(|psi|^2, x, t) and noise scale epsilon.
 *
 * psi_prime is the derivative with respect to s = |psi|^2 and drives the
 * force F(psi) = psi_prime(|psi|^2) psi. psi_double_prime is its s-derivative,
 * used only by the tangent maps.
 */
struct Nonlinearity {
  std::function<double(double s, double x, double t)> psi_prime;
  std::function<double(double s, double x, double t)> psi_double_prime;
  std::function<double(double s, double x)> psi;
  double epsilon = 0.0;
  NonlinearityKind kind = NonlinearityKind::custom;

  /// Psi = s^2 / 2, Psi' = s, Psi'' = 1.
  static Nonlinearity cubic(double epsilon);
  /// Psi identically zero.
  static Nonlinearity linear(double epsilon);

  Potential potential() const;
};

struct SolverParams {
  double fp_tol = 1e-12;
  int max_iter = 200;
  double divergence_guard = 1e8;
  /// The midpoint scheme is implicit in the noise and expects truncated increments.
  bool require_truncated_noise = true;
};

void validate(const SolverParams& sp);

/// Non-convergence or divergence of an implicit solve.
class NumericalError : public std::runtime_error {
 public:
  enum class Kind { non_convergence, divergence };

  NumericalError(Kind kind, std::string detail, double value)
      : std::runtime_error(compose(kind, detail, value, std::nullopt)), kind_(kind), detail_(std::move(detail)),
        value_(value) {}

  Kind kind() const { return kind_; }
  /// Last residual (non-convergence) or iterate norm (divergence).
  double value() const { return value_; }
  std::optional<long> step() const { return step_; }

  NumericalError at_step(long step) const {
    NumericalError e(kind_, detail_, value_, step);
    return e;
  }

 private:
  NumericalError(Kind kind, std::string detail, double value, std::optional<long> step)
      : std::runtime_error(compose(kind, detail, value, step)), kind_(kind), detail_(std::move(detail)),
        value_(value), step_(step) {}

  static std::string compose(Kind kind, const std::string& detail, double value, std::optional<long> step);

  Kind kind_;
  std::string detail_;
  double value_;
  std::optional<long> step_;
};

/// Result of one implicit step.
struct StepOutcome {
  ComplexField state;
  /// Converged stage values; for the midpoint scheme the single stage is the half state.
  std::vector<ComplexField> stages;
  int iterations = 0;

  const ComplexField& half_state() const { return stages.front(); }
};

/**
 * Midpoint step in Cayley form:
 *   phi^{n+1} = S_hat phi^n + i dt T F(t_{n+1/2}, u) - i eps T (u dW),  u = (phi^n + phi^{n+1}) / 2,
 * solved by fixed-point iteration on u.
 */
StepOutcome midpoint_step(const ComplexField& state, const Nonlinearity& nl, double dt, double t,
                          const WienerIncrement& incr, const SolverParams& sp);

/// General s-stage stochastic Runge-Kutta step with the Laplacian treated implicitly in each stage solve.
StepOutcome srk_step(const ComplexField& state, const Tableau& tableau, const Nonlinearity& nl, double dt, double t,
                     const WienerIncrement& incr, const SolverParams& sp);

/// Noise term of the backward-Euler comparison scheme: -i eps dW, or -i eps phi^{n+1} dW.
enum class ComparisonNoise { additive, multiplicative };

/// phi^{n+1} = phi^n + i dt A phi^{n+1} + i dt F(phi^{n+1}) - i eps [phi^{n+1}] dW.
StepOutcome nonsymplectic_step(const ComplexField& state, const Nonlinearity& nl, double dt, double t,
                               const WienerIncrement& incr, const SolverParams& sp,
                               ComparisonNoise noise = ComparisonNoise::additive);

/// Derivative of the force F(u) = Psi'(|u|^2) u in direction v (real-linear, not complex-linear).
Eigen::VectorXcd force_derivative(const ComplexField& u, const Eigen::VectorXcd& v, const Nonlinearity& nl, double t);

/// Linearization of midpoint_step about the converged half state of `step`.
ComplexField tangent_step(const StepOutcome& step, const ComplexField& delta, const Nonlinearity& nl, double dt,
                          double t, const WienerIncrement& incr, const SolverParams& sp);

/// Linearization of srk_step about its converged stages.
ComplexField srk_tangent_step(const StepOutcome& step, const ComplexField& delta, const Tableau& tableau,
                              const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                              const SolverParams& sp);

/// Linearization of nonsymplectic_step about its converged new state.
ComplexField nonsymplectic_tangent_step(const StepOutcome& step, const ComplexField& delta, const Nonlinearity& nl,
                                        double dt, double t, const WienerIncrement& incr, const SolverParams& sp,
                                        ComparisonNoise noise = ComparisonNoise::additive);

/// exp(-i eps c W) exp(i t A) phi for Psi' = 0 and a single constant noise mode of amplitude c.
ComplexField exact_phase_solution(const ComplexField& initial, const Nonlinearity& nl, const NoiseModel& noise,
                                  double w_value, double t);

enum class Scheme { midpoint, srk, nonsymplectic };

struct SchemeSpec {
  Scheme scheme = Scheme::midpoint;
  Tableau tableau = midpoint_tableau();
  ComparisonNoise comparison_noise = ComparisonNoise::additive;
  bool truncate = true;
  int truncate_k = 2;

  /// True when the step is implicit in the noise term, so increments are truncated.
  bool implicit_in_noise() const;
};

/// Truncates `raw` when the scheme is implicit in the noise and truncation is enabled.
WienerIncrement prepare_increment(const NoiseModel& model, const WienerIncrement& raw, const SchemeSpec& spec);

/// Dispatches one step of the selected scheme.
StepOutcome advance(const ComplexField& state, const SchemeSpec& spec, const Nonlinearity& nl, double dt, double t,
                    const WienerIncrement& incr, const SolverParams& sp);

/// Linearization of `advance` about the step it returned.
ComplexField advance_tangent(const StepOutcome& step, const ComplexField& delta, const SchemeSpec& spec,
                             const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                             const SolverParams& sp);

struct StepRecord {
  long step = 0;
  double time = 0.0;
  ComplexField state;
  double charge = 0.0;
  double energy = 0.0;
  int iterations = 0;
};

StepRecord make_record(long step, double time, const ComplexField& state, const Nonlinearity& nl, int iterations);

/**
 * Runs n_steps of the selected scheme with increments drawn from `stream` in
 * step order. Records step 0, every `record_every`-th step, and the last step.
 */
std::vector<StepRecord> integrate_path(const ComplexField& initial, const SchemeSpec& spec, const Nonlinearity& nl,
                                       double dt, long n_steps, const NoiseModel& noise, GaussianStream& stream,
                                       const SolverParams& sp, long record_every = 1, double t0 = 0.0);

}  // namespace stosym
