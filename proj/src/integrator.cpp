#include "stosym/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixed_point.hpp"

namespace stosym {

using detail::force;

Nonlinearity Nonlinearity::cubic(double epsilon) {
  Nonlinearity nl;
  nl.psi_prime = [](double s, double, double) { return s; };
  nl.psi_double_prime = [](double, double, double) { return 1.0; };
  nl.psi = [](double s, double) { return 0.5 * s * s; };
  nl.epsilon = epsilon;
  nl.kind = NonlinearityKind::cubic;
  return nl;
}

Nonlinearity Nonlinearity::linear(double epsilon) {
  Nonlinearity nl;
  nl.psi_prime = [](double, double, double) { return 0.0; };
  nl.psi_double_prime = [](double, double, double) { return 0.0; };
  nl.psi = [](double, double) { return 0.0; };
  nl.epsilon = epsilon;
  nl.kind = NonlinearityKind::linear;
  return nl;
}

Potential Nonlinearity::potential() const { return psi; }

void validate(const SolverParams& sp) {
  if (!(sp.fp_tol > 0.0)) throw std::invalid_argument("solver: fp_tol must be positive");
  if (sp.max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
  if (!(sp.divergence_guard > 0.0)) throw std::invalid_argument("solver: divergence_guard must be positive");
}

std::string NumericalError::compose(Kind kind, const std::string& detail, double value, std::optional<long> step) {
  std::ostringstream os;
  os.precision(6);
  if (kind == Kind::non_convergence)
    os << detail << ": fixed-point iteration did not converge (last residual " << value << ")";
  else
    os << detail << ": iterate diverged (norm " << value << ")";
  if (step) os << " at step " << *step;
  return os.str();
}

namespace {

void check_increment(const ComplexField& state, double dt, const WienerIncrement& incr) {
  if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
  if (incr.field.size() != state.size()) throw std::invalid_argument("increment lives on a different grid");
  if (std::abs(incr.dt - dt) > 1e-12 * dt) throw std::invalid_argument("increment dt does not match step dt");
}

}  // namespace

Eigen::VectorXcd force_derivative(const ComplexField& u, const Eigen::VectorXcd& v, const Nonlinearity& nl, double t) {
  if (nl.kind == NonlinearityKind::linear) return Eigen::VectorXcd::Zero(v.size());
  Eigen::VectorXcd out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const Complex uj = u.values(j);
    const double s = std::norm(uj);
    const double x = u.grid.x(j);
    const double ds = 2.0 * (std::conj(uj) * v(j)).real();
    out(j) = nl.psi_prime(s, x, t) * v(j) + nl.psi_double_prime(s, x, t) * ds * uj;
  }
  return out;
}

StepOutcome midpoint_step(const ComplexField& state, const Nonlinearity& nl, double dt, double t,
                          const WienerIncrement& incr, const SolverParams& sp) {
  check_increment(state, dt, incr);
  if (sp.require_truncated_noise && !incr.truncated && nl.epsilon != 0.0 && incr.mode_draws.size() > 0)
    throw std::invalid_argument("midpoint step expects a truncated increment");
  const Grid& g = state.grid;
  const CayleyOperator op(g, dt);
  const Eigen::VectorXcd s_hat = op.apply_s_hat(state.values);
  const Complex i_dt(0.0, dt);
  const Complex i_eps(0.0, nl.epsilon);
  const double t_half = t + 0.5 * dt;
  const Eigen::VectorXd& dw = incr.field.values;

  Eigen::VectorXcd u = state.values;
  Eigen::VectorXcd next = s_hat;
  auto update = [&](const Eigen::VectorXcd& cur) -> Eigen::VectorXcd {
    Eigen::VectorXcd forcing = i_dt * force(g, cur, nl, t_half) - i_eps * cur.cwiseProduct(dw.cast<Complex>());
    next = s_hat + op.apply_t(forcing);
    return 0.5 * (state.values + next);
  };
  const int iters = detail::fixed_point_field(u, update, g.dx, sp.fp_tol, sp, "midpoint step");
  return StepOutcome{ComplexField(g, std::move(next)), {ComplexField(g, std::move(u))}, iters};
}

StepOutcome nonsymplectic_step(const ComplexField& state, const Nonlinearity& nl, double dt, double t,
                               const WienerIncrement& incr, const SolverParams& sp, ComparisonNoise noise) {
  check_increment(state, dt, incr);
  const Grid& g = state.grid;
  const double r = dt / (g.dx * g.dx);
  // I - i dt A
  const auto solver = TridiagonalSolver<Complex>::constant(g.interior(), Complex(1.0, 2.0 * r), Complex(0.0, -r));
  const Complex i_dt(0.0, dt);
  const Complex i_eps(0.0, nl.epsilon);
  const double t_new = t + dt;
  const Eigen::VectorXcd dw = incr.field.values.cast<Complex>();

  Eigen::VectorXcd u = state.values;
  auto update = [&](const Eigen::VectorXcd& cur) -> Eigen::VectorXcd {
    Eigen::VectorXcd rhs = state.values + i_dt * force(g, cur, nl, t_new);
    if (noise == ComparisonNoise::additive)
      rhs -= i_eps * dw;
    else
      rhs -= i_eps * cur.cwiseProduct(dw);
    return solver.solve(rhs);
  };
  const int iters = detail::fixed_point_field(u, update, g.dx, sp.fp_tol, sp, "nonsymplectic step");
  ComplexField next(g, std::move(u));
  return StepOutcome{next, {next}, iters};
}

ComplexField tangent_step(const StepOutcome& step, const ComplexField& delta, const Nonlinearity& nl, double dt,
                          double t, const WienerIncrement& incr, const SolverParams& sp) {
  const ComplexField& half = step.half_state();
  check_increment(half, dt, incr);
  if (!(delta.grid == half.grid)) throw std::invalid_argument("perturbation lives on a different grid");
  const Grid& g = half.grid;
  const CayleyOperator op(g, dt);
  const Eigen::VectorXcd s_hat = op.apply_s_hat(delta.values);
  const Complex i_dt(0.0, dt);
  const Complex i_eps(0.0, nl.epsilon);
  const double t_half = t + 0.5 * dt;
  const Eigen::VectorXcd dw = incr.field.values.cast<Complex>();

  Eigen::VectorXcd du = delta.values;
  Eigen::VectorXcd next = s_hat;
  auto update = [&](const Eigen::VectorXcd& cur) -> Eigen::VectorXcd {
    Eigen::VectorXcd forcing = i_dt * force_derivative(half, cur, nl, t_half) - i_eps * cur.cwiseProduct(dw);
    next = s_hat + op.apply_t(forcing);
    return 0.5 * (delta.values + next);
  };
  const double tol = sp.fp_tol * std::max(1.0, l2_norm(delta.values, g.dx));
  detail::fixed_point_field(du, update, g.dx, tol, sp, "midpoint tangent");
  return ComplexField(g, std::move(next));
}

ComplexField nonsymplectic_tangent_step(const StepOutcome& step, const ComplexField& delta, const Nonlinearity& nl,
                                        double dt, double t, const WienerIncrement& incr, const SolverParams& sp,
                                        ComparisonNoise noise) {
  const ComplexField& base = step.state;
  check_increment(base, dt, incr);
  if (!(delta.grid == base.grid)) throw std::invalid_argument("perturbation lives on a different grid");
  const Grid& g = base.grid;
  const double r = dt / (g.dx * g.dx);
  const auto solver = TridiagonalSolver<Complex>::constant(g.interior(), Complex(1.0, 2.0 * r), Complex(0.0, -r));
  const Complex i_dt(0.0, dt);
  const Complex i_eps(0.0, nl.epsilon);
  const Eigen::VectorXcd dw = incr.field.values.cast<Complex>();

  Eigen::VectorXcd dn = delta.values;
  auto update = [&](const Eigen::VectorXcd& cur) -> Eigen::VectorXcd {
    Eigen::VectorXcd rhs = delta.values + i_dt * force_derivative(base, cur, nl, t + dt);
    if (noise == ComparisonNoise::multiplicative) rhs -= i_eps * cur.cwiseProduct(dw);
    return solver.solve(rhs);
  };
  const double tol = sp.fp_tol * std::max(1.0, l2_norm(delta.values, g.dx));
  detail::fixed_point_field(dn, update, g.dx, tol, sp, "nonsymplectic tangent");
  return ComplexField(g, std::move(dn));
}

ComplexField exact_phase_solution(const ComplexField& initial, const Nonlinearity& nl, const NoiseModel& noise,
                                  double w_value, double t) {
  if (noise.kind != NoiseKind::constant) throw std::invalid_argument("exact phase solution needs constant-mode noise");
  if (nl.kind != NonlinearityKind::linear) throw std::invalid_argument("exact phase solution needs Psi' = 0");
  ComplexField out = exact_linear_propagator(initial, t);
  out.values *= std::polar(1.0, -nl.epsilon * noise.amplitude * w_value);
  return out;
}

bool SchemeSpec::implicit_in_noise() const {
  switch (scheme) {
    case Scheme::midpoint:
      return true;
    case Scheme::srk:
      return tableau.a1.size() > 0 && tableau.a1.cwiseAbs().maxCoeff() > 0.0;
    case Scheme::nonsymplectic:
      return comparison_noise == ComparisonNoise::multiplicative;
  }
  return true;
}

WienerIncrement prepare_increment(const NoiseModel& model, const WienerIncrement& raw, const SchemeSpec& spec) {
  if (spec.truncate && spec.implicit_in_noise() && !raw.truncated)
    return truncate_increment(model, raw, spec.truncate_k);
  return raw;
}

StepOutcome advance(const ComplexField& state, const SchemeSpec& spec, const Nonlinearity& nl, double dt, double t,
                    const WienerIncrement& incr, const SolverParams& sp) {
  switch (spec.scheme) {
    case Scheme::midpoint:
      return midpoint_step(state, nl, dt, t, incr, sp);
    case Scheme::srk:
      return srk_step(state, spec.tableau, nl, dt, t, incr, sp);
    case Scheme::nonsymplectic:
      return nonsymplectic_step(state, nl, dt, t, incr, sp, spec.comparison_noise);
  }
  throw std::logic_error("unknown scheme");
}

ComplexField advance_tangent(const StepOutcome& step, const ComplexField& delta, const SchemeSpec& spec,
                             const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                             const SolverParams& sp) {
  switch (spec.scheme) {
    case Scheme::midpoint:
      return tangent_step(step, delta, nl, dt, t, incr, sp);
    case Scheme::srk:
      return srk_tangent_step(step, delta, spec.tableau, nl, dt, t, incr, sp);
    case Scheme::nonsymplectic:
      return nonsymplectic_tangent_step(step, delta, nl, dt, t, incr, sp, spec.comparison_noise);
  }
  throw std::logic_error("unknown scheme");
}

StepRecord make_record(long step, double time, const ComplexField& state, const Nonlinearity& nl, int iterations) {
  return StepRecord{step, time, state, discrete_charge(state), discrete_energy(state, nl.potential()), iterations};
}

std::vector<StepRecord> integrate_path(const ComplexField& initial, const SchemeSpec& spec, const Nonlinearity& nl,
                                       double dt, long n_steps, const NoiseModel& noise, GaussianStream& stream,
                                       const SolverParams& sp, long record_every, double t0) {
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (!(noise.grid == initial.grid)) throw std::invalid_argument("noise model lives on a different grid");
  std::vector<StepRecord> records;
  records.push_back(make_record(0, t0, initial, nl, 0));
  ComplexField state = initial;
  for (long n = 0; n < n_steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    const WienerIncrement incr = prepare_increment(noise, sample_increment(noise, dt, stream), spec);
    StepOutcome out;
    try {
      out = advance(state, spec, nl, dt, t, incr, sp);
    } catch (const NumericalError& e) {
      throw e.at_step(n + 1);
    }
    state = std::move(out.state);
    const long step = n + 1;
    if (step % record_every == 0 || step == n_steps)
      records.push_back(make_record(step, t0 + static_cast<double>(step) * dt, state, nl, out.iterations));
  }
  return records;
}

}  // namespace stosym
