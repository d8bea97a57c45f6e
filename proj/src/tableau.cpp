#include "stosym/tableau.hpp"

#include <algorithm>

namespace stosym {

Tableau midpoint_tableau() {
  Tableau t;
  t.stages = 1;
  t.a0 = Eigen::MatrixXd::Constant(1, 1, 0.5);
  t.a1 = Eigen::MatrixXd::Constant(1, 1, 0.5);
  t.b0 = Eigen::VectorXd::Ones(1);
  t.b1 = Eigen::VectorXd::Ones(1);
  return t;
}

Tableau explicit_euler_tableau() {
  Tableau t;
  t.stages = 1;
  t.a0 = Eigen::MatrixXd::Zero(1, 1);
  t.a1 = Eigen::MatrixXd::Zero(1, 1);
  t.b0 = Eigen::VectorXd::Ones(1);
  t.b1 = Eigen::VectorXd::Ones(1);
  return t;
}

void validate(const Tableau& t) {
  const int s = t.stages;
  if (s < 1) throw TableauError("tableau: stage count must be >= 1, got " + std::to_string(s));
  auto square = [s](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != s || m.cols() != s)
      throw TableauError(std::string("tableau: block ") + name + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(s) + "x" + std::to_string(s));
  };
  auto vec = [s](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != s)
      throw TableauError(std::string("tableau: block ") + name + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(s));
  };
  square(t.a0, "a0");
  square(t.a1, "a1");
  vec(t.b0, "b0");
  vec(t.b1, "b1");
  if (!t.a0.allFinite() || !t.a1.allFinite() || !t.b0.allFinite() || !t.b1.allFinite())
    throw TableauError("tableau: coefficients must be finite");
}

namespace {

Eigen::MatrixXd condition_defect(const Eigen::VectorXd& bl, const Eigen::VectorXd& br, const Eigen::MatrixXd& a_lr,
                                 const Eigen::MatrixXd& a_rl) {
  const Eigen::Index s = bl.size();
  Eigen::MatrixXd d(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) d(i, j) = bl(i) * br(j) - (bl(i) * a_lr(i, j) + br(j) * a_rl(j, i));
  return d;
}

}  // namespace

SymplecticDefects symplectic_defects(const Tableau& t) {
  validate(t);
  return {condition_defect(t.b0, t.b0, t.a0, t.a0), condition_defect(t.b0, t.b1, t.a1, t.a0),
          condition_defect(t.b1, t.b1, t.a1, t.a1)};
}

SymplecticCheck is_symplectic(const Tableau& t, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
  const SymplecticDefects d = symplectic_defects(t);
  const double defect = std::max({d.drift_drift.cwiseAbs().maxCoeff(), d.drift_noise.cwiseAbs().maxCoeff(),
                                  d.noise_noise.cwiseAbs().maxCoeff()});
  return {defect <= tol, defect};
}

}  // namespace stosym
