#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace stosym {

/// Thrown when Thomas elimination meets a pivot that is numerically zero.
class SingularPivotError : public std::runtime_error {
 public:
  explicit SingularPivotError(Eigen::Index row)
      : std::runtime_error("tridiagonal solve: zero pivot at row " + std::to_string(row)), row_(row) {}
  Eigen::Index row() const { return row_; }

 private:
  Eigen::Index row_;
};

/**
 * Pre-factored tridiagonal matrix, solved with Thomas elimination (no pivoting).
 *
 * The factorization is computed once and reused for every right-hand side;
 * the time steppers solve against the same Cayley matrix many times per step.
 */
template <typename Scalar>
class TridiagonalSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  TridiagonalSolver() = default;

  /// sub(0) and sup(n-1) are ignored.
  TridiagonalSolver(const Vector& sub, const Vector& diag, const Vector& sup) { factor(sub, diag, sup); }

  /// Constant-coefficient matrix with `diag` on the diagonal and `off` on both off-diagonals.
  static TridiagonalSolver constant(Eigen::Index n, Scalar diag, Scalar off) {
    return TridiagonalSolver(Vector::Constant(n, off), Vector::Constant(n, diag), Vector::Constant(n, off));
  }

  Eigen::Index size() const { return diag_inv_.size(); }

  template <typename Derived>
  Vector solve(const Eigen::MatrixBase<Derived>& rhs) const {
    const Eigen::Index n = size();
    if (rhs.size() != n) throw std::invalid_argument("tridiagonal solve: right-hand side has wrong length");
    Vector x(n);
    if (n == 0) return x;
    x(0) = rhs(0) * diag_inv_(0);
    for (Eigen::Index i = 1; i < n; ++i) x(i) = (rhs(i) - sub_(i) * x(i - 1)) * diag_inv_(i);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= c_star_(i) * x(i + 1);
    return x;
  }

 private:
  void factor(const Vector& sub, const Vector& diag, const Vector& sup) {
    const Eigen::Index n = diag.size();
    if (sub.size() != n || sup.size() != n) throw std::invalid_argument("tridiagonal factor: band lengths differ");
    sub_ = sub;
    c_star_ = Vector::Zero(n);
    diag_inv_ = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar pivot = diag(i);
      if (i > 0) pivot -= sub(i) * c_star_(i - 1);
      if (std::abs(pivot) == 0.0) throw SingularPivotError(i);
      diag_inv_(i) = Scalar(1) / pivot;
      if (i + 1 < n) c_star_(i) = sup(i) * diag_inv_(i);
    }
  }

  Vector sub_;
  Vector c_star_;
  Vector diag_inv_;
};

}  // namespace stosym
