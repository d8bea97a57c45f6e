#include <algorithm>
#include <cmath>

#include "fixed_point.hpp"
#include "stosym/integrator.hpp"

namespace stosym {
namespace {

/// Block-tridiagonal factorization of I - i dt (a0 (x) A), blocks indexed by grid point.
class StageSolver {
 public:
  StageSolver(const Grid& grid, const Eigen::MatrixXd& a0, double dt) {
    const Index m = grid.interior();
    const Index s = a0.rows();
    const Complex c(0.0, dt / (grid.dx * grid.dx));
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(s, s);
    diag_ = id + 2.0 * c * a0.cast<Complex>();
    off_ = -c * a0.cast<Complex>();
    pivot_inv_.resize(m);
    c_star_.resize(m);
    for (Index j = 0; j < m; ++j) {
      Eigen::MatrixXcd pivot = diag_;
      if (j > 0) pivot -= off_ * c_star_[j - 1];
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(pivot);
      if (!lu.isInvertible()) throw SingularPivotError(j);
      pivot_inv_[j] = lu.inverse();
      c_star_[j] = pivot_inv_[j] * off_;
    }
  }

  /// rhs and result are m x s, one column per stage.
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const {
    const Index m = rhs.rows();
    Eigen::MatrixXcd y(m, rhs.cols());
    if (m == 0) return y;
    y.row(0) = (pivot_inv_[0] * rhs.row(0).transpose()).transpose();
    for (Index j = 1; j < m; ++j)
      y.row(j) = (pivot_inv_[j] * (rhs.row(j).transpose() - off_ * y.row(j - 1).transpose())).transpose();
    for (Index j = m - 2; j >= 0; --j) y.row(j) -= (c_star_[j] * y.row(j + 1).transpose()).transpose();
    return y;
  }

 private:
  Eigen::MatrixXcd diag_;
  Eigen::MatrixXcd off_;
  std::vector<Eigen::MatrixXcd> pivot_inv_;
  std::vector<Eigen::MatrixXcd> c_star_;
};

double max_column_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double dx) {
  double d = 0.0;
  for (Index c = 0; c < a.cols(); ++c) d = std::max(d, l2_norm(a.col(c) - b.col(c), dx));
  return d;
}

double max_column_norm(const Eigen::MatrixXcd& a, double dx) {
  double d = 0.0;
  for (Index c = 0; c < a.cols(); ++c) d = std::max(d, l2_norm(a.col(c), dx));
  return d;
}

/**
 * Shared stage solve and update of the s-stage scheme. `drift(Y)` returns the
 * non-Laplacian drift per stage (F(Y_j) for the step, DF(Y_j)[dY_j] for the
 * tangent); the Laplacian part is handled by the block solve.
 */
template <typename Drift>
StepOutcome run_stages(const ComplexField& start, const Tableau& tab, double dt, double epsilon,
                       const WienerIncrement& incr, const SolverParams& sp, double tol, Drift&& drift,
                       const char* what) {
  validate(tab);
  const Grid& g = start.grid;
  const Index s = tab.stages;
  const StageSolver solver(g, tab.a0, dt);
  const Complex i_dt(0.0, dt);
  const Complex i_eps(0.0, epsilon);
  const Eigen::VectorXcd dw = incr.field.values.cast<Complex>();
  const Eigen::MatrixXcd a0t = tab.a0.transpose().cast<Complex>();
  const Eigen::MatrixXcd a1t = tab.a1.transpose().cast<Complex>();
  const Eigen::MatrixXcd base = start.values.replicate(1, s);

  auto noise_term = [&](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd { return dw.asDiagonal() * y; };

  Eigen::MatrixXcd y = base;
  auto update = [&](const Eigen::MatrixXcd& cur) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd rhs = base + i_dt * drift(cur) * a0t - i_eps * noise_term(cur) * a1t;
    return solver.solve(rhs);
  };
  const int iters = detail::fixed_point(
      y, update, [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return max_column_distance(a, b, g.dx); },
      [&](const Eigen::MatrixXcd& a) { return max_column_norm(a, g.dx); }, tol, sp, what);

  const Eigen::MatrixXcd ny = noise_term(y);
  Eigen::VectorXcd next = start.values - i_eps * ny * tab.b1.cast<Complex>();
  Eigen::FullPivLU<Eigen::MatrixXd> a0_lu(tab.a0);
  if (a0_lu.isInvertible()) {
    // Recover i dt h_j from the stage equations instead of applying A to the stages.
    const Eigen::MatrixXcd z = y - base + i_eps * ny * a1t;
    const Eigen::MatrixXcd k = z * a0_lu.inverse().transpose().cast<Complex>();
    next += k * tab.b0.cast<Complex>();
  } else {
    Eigen::MatrixXcd h = drift(y);
    for (Index c = 0; c < s; ++c) h.col(c) += laplacian(y.col(c), g.dx);
    next += i_dt * h * tab.b0.cast<Complex>();
  }

  StepOutcome out{ComplexField(g, std::move(next)), {}, iters};
  for (Index c = 0; c < s; ++c) out.stages.emplace_back(g, y.col(c));
  return out;
}

Eigen::VectorXd stage_times(const Tableau& tab, double t, double dt) {
  return (t + dt * tab.a0.rowwise().sum().array()).matrix();
}

}  // namespace

StepOutcome srk_step(const ComplexField& state, const Tableau& tableau, const Nonlinearity& nl, double dt, double t,
                     const WienerIncrement& incr, const SolverParams& sp) {
  if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
  if (incr.field.size() != state.size()) throw std::invalid_argument("increment lives on a different grid");
  validate(tableau);
  const Eigen::VectorXd times = stage_times(tableau, t, dt);
  const Grid& g = state.grid;
  auto drift = [&](const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd f(y.rows(), y.cols());
    for (Index c = 0; c < y.cols(); ++c) f.col(c) = detail::force(g, y.col(c), nl, times(c));
    return f;
  };
  return run_stages(state, tableau, dt, nl.epsilon, incr, sp, sp.fp_tol, drift, "srk step");
}

ComplexField srk_tangent_step(const StepOutcome& step, const ComplexField& delta, const Tableau& tableau,
                              const Nonlinearity& nl, double dt, double t, const WienerIncrement& incr,
                              const SolverParams& sp) {
  validate(tableau);
  if (static_cast<Index>(step.stages.size()) != tableau.stages)
    throw std::invalid_argument("step outcome does not match the tableau's stage count");
  const Eigen::VectorXd times = stage_times(tableau, t, dt);
  auto drift = [&](const Eigen::MatrixXcd& dy) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd f(dy.rows(), dy.cols());
    for (Index c = 0; c < dy.cols(); ++c) f.col(c) = force_derivative(step.stages[c], dy.col(c), nl, times(c));
    return f;
  };
  const double tol = sp.fp_tol * std::max(1.0, l2_norm(delta.values, delta.grid.dx));
  return run_stages(delta, tableau, dt, nl.epsilon, incr, sp, tol, drift, "srk tangent").state;
}

}  // namespace stosym
