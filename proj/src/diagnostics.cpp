#include "stosym/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stosym {

double charge_drift(const std::vector<StepRecord>& records) {
  if (records.empty()) throw std::invalid_argument("charge_drift needs at least one record");
  const double c0 = records.front().charge;
  double drift = 0.0;
  for (const auto& r : records) drift = std::max(drift, std::abs(r.charge - c0));
  return c0 != 0.0 ? drift / c0 : drift;
}

EnsembleStats ensemble_stats(const std::vector<std::vector<StepRecord>>& paths) {
  if (paths.empty()) throw std::invalid_argument("ensemble needs at least one path");
  const std::size_t n = paths.front().size();
  for (const auto& p : paths)
    if (p.size() != n) throw std::invalid_argument("paths have different record counts");
  EnsembleStats st;
  st.sample_count = paths.size();
  st.times.resize(n);
  st.mean_charge.assign(n, 0.0);
  st.mean_energy.assign(n, 0.0);
  st.max_charge_drift.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) st.times[k] = paths.front()[k].time;
  // Fixed path order keeps the sums reproducible.
  for (const auto& p : paths) {
    const double c0 = p.front().charge;
    double running = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      st.mean_charge[k] += p[k].charge;
      st.mean_energy[k] += p[k].energy;
      const double d = std::abs(p[k].charge - c0);
      running = std::max(running, c0 != 0.0 ? d / c0 : d);
      st.max_charge_drift[k] = std::max(st.max_charge_drift[k], running);
    }
    st.path_charge_drift.push_back(charge_drift(p));
  }
  const double inv = 1.0 / static_cast<double>(paths.size());
  for (std::size_t k = 0; k < n; ++k) {
    st.mean_charge[k] *= inv;
    st.mean_energy[k] *= inv;
  }
  return st;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs matching inputs of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("degenerate fit: all abscissae are equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

LineFit averaged_energy_slope(const EnsembleStats& stats) {
  if (stats.times.size() < 3) throw std::invalid_argument("energy slope needs at least 3 time points");
  if (stats.sample_count < 2) throw std::invalid_argument("energy slope needs at least 2 paths");
  return fit_line(stats.times, stats.mean_energy);
}

double predicted_energy_slope(const ComplexField& initial, const NoiseModel& noise, double epsilon) {
  const Grid& g = initial.grid;
  const Index m = g.interior();
  Eigen::VectorXd grad_sq = Eigen::VectorXd::Zero(m);
  for (Index l = 0; l < noise.mode_count(); ++l) {
    const auto& shape = noise.mode_shapes.col(l);
    for (Index j = 0; j < m; ++j) {
      const double left = j > 0 ? shape(j - 1) : 0.0;
      const double right = j + 1 < m ? shape(j + 1) : 0.0;
      const double d = (right - left) / (2.0 * g.dx);
      grad_sq(j) += d * d;
    }
  }
  return 0.5 * epsilon * epsilon * g.dx * initial.values.cwiseAbs2().dot(grad_sq);
}

Eigen::MatrixXd canonical_form(Index m) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  omega.topRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
  omega.bottomLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  return omega;
}

Eigen::MatrixXd step_jacobian(const StepOutcome& step, const ComplexField& state, const SchemeSpec& spec,
                              const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                              const SolverParams& sp) {
  const Index m = state.size();
  Eigen::MatrixXd jac(2 * m, 2 * m);
  for (Index col = 0; col < 2 * m; ++col) {
    ComplexField delta(state.grid);
    delta.values(col % m) = col < m ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    const ComplexField image = advance_tangent(step, delta, spec, nl, dt, t, incr, sp);
    jac.col(col).head(m) = image.values.real();
    jac.col(col).tail(m) = image.values.imag();
  }
  return jac;
}

double symplectic_form_defect(const Eigen::MatrixXd& jacobian) {
  const Eigen::MatrixXd omega = canonical_form(jacobian.rows() / 2);
  return (jacobian.transpose() * omega * jacobian - omega).cwiseAbs().maxCoeff();
}

double symplectic_defect(const ComplexField& state, const SchemeSpec& spec, const Nonlinearity& nl, double dt,
                         double t, const WienerIncrement& incr, const SolverParams& sp) {
  if (state.size() > kMaxJacobianInterior)
    throw std::invalid_argument("symplectic defect: grid has " + std::to_string(state.size()) +
                                " interior points, at most 64 supported");
  const StepOutcome step = advance(state, spec, nl, dt, t, incr, sp);
  return symplectic_form_defect(step_jacobian(step, state, spec, nl, dt, t, incr, sp));
}

double energy_identity_residual(const ComplexField& prev, const ComplexField& next, const Nonlinearity& nl,
                                double dt, double t, const WienerIncrement& incr) {
  if (!(prev.grid == next.grid)) throw std::invalid_argument("states live on different grids");
  if (!(dt > 0.0)) throw std::invalid_argument("energy_identity_residual needs dt > 0");
  const Grid& g = prev.grid;
  const double t_half = t + 0.5 * dt;
  double potential = 0.0;
  double noise = 0.0;
  for (Index j = 0; j < prev.size(); ++j) {
    const Complex u = 0.5 * (prev.values(j) + next.values(j));
    const double dcharge = std::norm(next.values(j)) - std::norm(prev.values(j));
    potential += nl.psi_prime(std::norm(u), g.x(j), t_half) * dcharge;
    noise += incr.field.values(j) * dcharge;
  }
  const double residual = gradient_energy(next) - gradient_energy(prev) - g.dx * potential +
                          nl.epsilon / dt * g.dx * noise;
  return std::abs(residual);
}

}  // namespace stosym
