#include "stosym/field.hpp"

#include <cmath>
#include <numbers>

namespace stosym {

Eigen::VectorXd Grid::coordinates() const {
  Eigen::VectorXd xs(interior());
  for (Index i = 0; i < xs.size(); ++i) xs(i) = x(i);
  return xs;
}

Grid build_grid(double half_width, int n_cells) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("grid half-width must be positive");
  if (n_cells < 3) throw std::invalid_argument("grid needs at least 3 cells");
  return Grid{half_width, n_cells, 2.0 * half_width / n_cells};
}

double gradient_energy(const ComplexField& f) {
  const Index m = f.size();
  const double dx = f.grid.dx;
  double sum = 0.0;
  Complex prev(0.0);
  for (Index j = 0; j <= m; ++j) {
    Complex cur = j < m ? f.values(j) : Complex(0.0);
    sum += std::norm(cur - prev);
    prev = cur;
  }
  return sum / dx;
}

double discrete_energy(const ComplexField& f, const Potential& potential) {
  double pot = 0.0;
  for (Index j = 0; j < f.size(); ++j) pot += potential(std::norm(f.values(j)), f.grid.x(j));
  return gradient_energy(f) - f.grid.dx * pot;
}

double laplacian_eigenvalue(const Grid& grid, int k) {
  const double s = std::sin(k * std::numbers::pi / (2.0 * grid.n_cells));
  return -4.0 / (grid.dx * grid.dx) * s * s;
}

RealField laplacian_eigenvector(const Grid& grid, int k) {
  RealField v(grid);
  for (Index i = 0; i < v.size(); ++i)
    v.values(i) = std::sin(k * std::numbers::pi * static_cast<double>(i + 1) / grid.n_cells);
  return v;
}

CayleyOperator::CayleyOperator(const Grid& grid, double dt) : grid_(grid), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("Cayley operator needs dt > 0");
  const double r = dt / (2.0 * grid.dx * grid.dx);
  // I - i dt/2 A: diagonal 1 + 2ir, off-diagonals -ir.
  solver_ = TridiagonalSolver<Complex>::constant(grid.interior(), Complex(1.0, 2.0 * r), Complex(0.0, -r));
}

Eigen::VectorXcd CayleyOperator::apply_s_hat(const Eigen::VectorXcd& v) const {
  const Complex half_step(0.0, 0.5 * dt_);
  Eigen::VectorXcd rhs = v + half_step * laplacian(v, grid_.dx);
  return solver_.solve(rhs);
}

CayleyResult cayley_apply(const ComplexField& f, double dt) {
  CayleyOperator op(f.grid, dt);
  return {ComplexField(f.grid, op.apply_s_hat(f.values)), ComplexField(f.grid, op.apply_t(f.values))};
}

ComplexField exact_linear_propagator(const ComplexField& f, double t) {
  if (t < 0.0) throw std::invalid_argument("exact propagator needs t >= 0");
  const Grid& g = f.grid;
  const Index m = g.interior();
  Eigen::MatrixXd basis(m, m);
  for (int k = 1; k <= m; ++k) basis.col(k - 1) = laplacian_eigenvector(g, k).values;
  // Columns are orthogonal with squared norm n_cells / 2.
  Eigen::VectorXcd coeff = basis.transpose().cast<Complex>() * f.values * (2.0 / g.n_cells);
  for (int k = 1; k <= m; ++k) coeff(k - 1) *= std::polar(1.0, laplacian_eigenvalue(g, k) * t);
  return ComplexField(g, basis.cast<Complex>() * coeff);
}

}  // namespace stosym
