#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stosym {

/// Coefficients of an s-stage stochastic Runge-Kutta method: a0/b0 weight the
/// drift, a1/b1 weight the Wiener increment.
struct Tableau {
  int stages = 0;
  Eigen::MatrixXd a0;
  Eigen::MatrixXd a1;
  Eigen::VectorXd b0;
  Eigen::VectorXd b1;
};

class TableauError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// a0 = a1 = [[1/2]], b0 = b1 = [1].
Tableau midpoint_tableau();
/// a0 = a1 = [[0]], b0 = b1 = [1]; the non-symplectic explicit analogue.
Tableau explicit_euler_tableau();

/// Throws TableauError naming the first block whose shape disagrees with `stages`.
void validate(const Tableau& t);

struct SymplecticCheck {
  bool symplectic = false;
  double max_defect = 0.0;
};

/// Defect matrices of the three bilinear symplecticity conditions; entry (i, j) is
/// b_i b_j - b_i a_ij - b_j a_ji for the (drift, drift), (drift, noise) and (noise, noise) pairs.
struct SymplecticDefects {
  Eigen::MatrixXd drift_drift;
  Eigen::MatrixXd drift_noise;
  Eigen::MatrixXd noise_noise;
};

SymplecticDefects symplectic_defects(const Tableau& t);

inline constexpr double kDefaultTableauTolerance = 1e-14;

SymplecticCheck is_symplectic(const Tableau& t, double tol = kDefaultTableauTolerance);

}  // namespace stosym
