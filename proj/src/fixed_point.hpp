#pragma once

#include "stosym/integrator.hpp"

namespace stosym::detail {

/// F(u)_j = Psi'(|u_j|^2, x_j, t) u_j
inline Eigen::VectorXcd force(const Grid& grid, const Eigen::VectorXcd& u, const Nonlinearity& nl, double t) {
  Eigen::VectorXcd out(u.size());
  if (nl.kind == NonlinearityKind::linear) return Eigen::VectorXcd::Zero(u.size());
  for (Index j = 0; j < u.size(); ++j) out(j) = nl.psi_prime(std::norm(u(j)), grid.x(j), t) * u(j);
  return out;
}

/**
 * Iterates u <- update(u) until successive iterates differ by at most
 * `tol` in the discrete L2 norm. Returns the iteration count; `u` holds the
 * last iterate.
 */
template <typename Vector, typename Update, typename Distance, typename Norm>
int fixed_point(Vector& u, Update&& update, Distance&& distance, Norm&& norm, double tol, const SolverParams& sp,
                const char* what) {
  double residual = 0.0;
  for (int iter = 1; iter <= sp.max_iter; ++iter) {
    Vector next = update(u);
    residual = distance(next, u);
    const double size = norm(next);
    if (!std::isfinite(size) || !std::isfinite(residual) || size > sp.divergence_guard)
      throw NumericalError(NumericalError::Kind::divergence, what, size);
    u = std::move(next);
    if (residual <= tol) return iter;
  }
  throw NumericalError(NumericalError::Kind::non_convergence, what, residual);
}

inline int fixed_point_field(Eigen::VectorXcd& u, const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& update,
                             double dx, double tol, const SolverParams& sp, const char* what) {
  return fixed_point(
      u, update, [dx](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return l2_norm(a - b, dx); },
      [dx](const Eigen::VectorXcd& a) { return l2_norm(a, dx); }, tol, sp, what);
}

}  // namespace stosym::detail
