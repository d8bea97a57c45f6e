#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>

#include "stosym/tridiagonal.hpp"

namespace stosym {

using Complex = std::complex<double>;
using Eigen::Index;

/// Uniform grid on [-L, L] with homogeneous Dirichlet boundary values.
/// Unknowns live on the m = n_cells - 1 interior points x_j = -L + j dx, j = 1..m.
struct Grid {
  double half_width = 1.0;
  int n_cells = 0;
  double dx = 0.0;

  Index interior() const { return n_cells - 1; }
  /// Coordinate of storage slot i (0-based), i.e. x_{i+1}.
  double x(Index i) const { return -half_width + static_cast<double>(i + 1) * dx; }
  Eigen::VectorXd coordinates() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid build_grid(double half_width, int n_cells);

/// Samples of a scalar field on the interior points of a grid.
template <typename Scalar>
struct Field {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Grid grid;
  Vector values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(Vector::Zero(g.interior())) {}
  Field(const Grid& g, Vector v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.interior()) throw std::invalid_argument("field length does not match grid");
  }

  Index size() const { return values.size(); }
  bool all_finite() const { return values.allFinite(); }
};

using ComplexField = Field<Complex>;
using RealField = Field<double>;

/// Field sampled from a function of position.
template <typename Scalar, typename Fn>
Field<Scalar> sample(const Grid& grid, Fn&& fn) {
  Field<Scalar> f(grid);
  for (Index i = 0; i < f.size(); ++i) f.values(i) = static_cast<Scalar>(fn(grid.x(i)));
  return f;
}

/// Three-point Dirichlet Laplacian, (f_{j-1} - 2 f_j + f_{j+1}) / dx^2 with f_0 = f_{m+1} = 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> laplacian(const Eigen::MatrixBase<Derived>& v, double dx) {
  using Scalar = typename Derived::Scalar;
  const Index m = v.size();
  const double inv = 1.0 / (dx * dx);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(m);
  for (Index j = 0; j < m; ++j) {
    Scalar left = j > 0 ? Scalar(v(j - 1)) : Scalar(0);
    Scalar right = j + 1 < m ? Scalar(v(j + 1)) : Scalar(0);
    out(j) = (left - Scalar(2) * Scalar(v(j)) + right) * inv;
  }
  return out;
}

template <typename Scalar>
Field<Scalar> laplacian_apply(const Field<Scalar>& f) {
  return Field<Scalar>(f.grid, laplacian(f.values, f.grid.dx));
}

/// Discrete L2 norm sqrt(dx * sum |v_j|^2).
template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& v, double dx) {
  return std::sqrt(dx * v.squaredNorm());
}

/// dx * sum |f_j|^2.
template <typename Scalar>
double discrete_charge(const Field<Scalar>& f) {
  return f.grid.dx * f.values.squaredNorm();
}

/// dx * sum_{j=0}^{m} |(f_{j+1} - f_j) / dx|^2, boundary cells included.
double gradient_energy(const ComplexField& f);

/// Potential term Psi(s, x) of the energy functional.
using Potential = std::function<double(double s, double x)>;

/// Gradient energy minus dx * sum Psi(|f_j|^2, x_j).
double discrete_energy(const ComplexField& f, const Potential& potential);

/// Eigenvalue of the Dirichlet Laplacian for mode k = 1..m.
double laplacian_eigenvalue(const Grid& grid, int k);
/// Eigenvector sin(k pi (x_j + L) / (2L)) sampled on the interior.
RealField laplacian_eigenvector(const Grid& grid, int k);

/**
 * Cayley operators of the Dirichlet Laplacian for a fixed step:
 * T = (I - i dt/2 A)^{-1} and S_hat = T (I + i dt/2 A).
 *
 * Each application costs one tridiagonal solve against the same factorization.
 */
class CayleyOperator {
 public:
  CayleyOperator(const Grid& grid, double dt);

  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }

  Eigen::VectorXcd apply_t(const Eigen::VectorXcd& v) const { return solver_.solve(v); }
  Eigen::VectorXcd apply_s_hat(const Eigen::VectorXcd& v) const;

 private:
  Grid grid_;
  double dt_;
  TridiagonalSolver<Complex> solver_;
};

struct CayleyResult {
  ComplexField s_hat_f;
  ComplexField t_f;
};

CayleyResult cayley_apply(const ComplexField& f, double dt);

/// exp(i t A) f evaluated in the discrete sine eigenbasis.
ComplexField exact_linear_propagator(const ComplexField& f, double t);

}  // namespace stosym
