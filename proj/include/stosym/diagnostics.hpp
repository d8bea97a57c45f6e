#pragma once

#include <vector>

#include "stosym/integrator.hpp"

namespace stosym {

/// max_n |charge_n - charge_0| / charge_0, or the absolute drift when charge_0 = 0.
double charge_drift(const std::vector<StepRecord>& records);

/// Per-time ensemble means over paths that share a record schedule.
struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> mean_charge;
  std::vector<double> mean_energy;
  /// Running maximum over paths of the relative charge drift up to each time.
  std::vector<double> max_charge_drift;
  /// charge_drift of each path over its whole record.
  std::vector<double> path_charge_drift;
  std::size_t sample_count = 0;
};

EnsembleStats ensemble_stats(const std::vector<std::vector<StepRecord>>& paths);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Least-squares line; r_squared is 1 when the data have zero variance.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Linear fit of mean energy against time.
LineFit averaged_energy_slope(const EnsembleStats& stats);

/**
 * Growth rate of the averaged energy predicted from the initial field:
 * (eps^2 / 2) dx sum_j |phi0_j|^2 sum_l ((d/dx shape_l)_j)^2 with central differences.
 * Reported next to the fitted slope; it is an estimate, not an identity.
 */
double predicted_energy_slope(const ComplexField& initial, const NoiseModel& noise, double epsilon);

/// Real 2m x 2m Jacobian of one step in (P, Q) coordinates, assembled from tangent maps of unit perturbations.
Eigen::MatrixXd step_jacobian(const StepOutcome& step, const ComplexField& state, const SchemeSpec& spec,
                              const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                              const SolverParams& sp);

/// Canonical skew matrix [[0, I], [-I, 0]] of size 2m.
Eigen::MatrixXd canonical_form(Index m);

/// ||J^T Omega J - Omega||_max.
double symplectic_form_defect(const Eigen::MatrixXd& jacobian);

inline constexpr Index kMaxJacobianInterior = 64;

/// Steps once from `state` and returns the symplectic defect of the step Jacobian. Rejects m > 64.
double symplectic_defect(const ComplexField& state, const SchemeSpec& spec, const Nonlinearity& nl, double dt,
                         double t, const WienerIncrement& incr, const SolverParams& sp);

/**
 * Residual of the discrete energy identity satisfied by one midpoint step
 * (phi = prev, phi' = next, u = (phi + phi') / 2, d|phi|^2 = |phi'|^2 - |phi|^2):
 *
 *   G(phi') - G(phi) - dx sum_j Psi'(|u_j|^2, x_j, t + dt/2) d|phi_j|^2
 *     + (eps / dt) dx sum_j dW_j d|phi_j|^2 = 0,
 *
 * where G is gradient_energy. It follows from multiplying the scheme by the
 * conjugate of phi' - phi, taking real parts and summing by parts with the
 * symmetric Dirichlet Laplacian. Returns the absolute residual.
 */
double energy_identity_residual(const ComplexField& prev, const ComplexField& next, const Nonlinearity& nl,
                                double dt, double t, const WienerIncrement& incr);

}  // namespace stosym
