#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "stosym/field.hpp"

namespace stosym::testing {

inline ComplexField sin_pi(const Grid& g) {
  return sample<Complex>(g, [](double x) { return std::sin(std::numbers::pi * x); });
}

/// Random field with independent standard normal real and imaginary parts, scaled by `amplitude`.
inline ComplexField random_field(const Grid& g, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField f(g);
  for (Index j = 0; j < f.size(); ++j) f.values(j) = amplitude * Complex(n(rng), n(rng));
  return f;
}

/// Random combination of the lowest `modes` sine modes; smooth enough for stiff steps.
inline ComplexField random_smooth_field(const Grid& g, std::mt19937_64& rng, int modes = 4, double amplitude = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField f(g);
  for (int k = 1; k <= modes; ++k) {
    const Complex c(n(rng), n(rng));
    for (Index j = 0; j < f.size(); ++j)
      f.values(j) += amplitude / k * c * std::sin(k * std::numbers::pi * static_cast<double>(j + 1) / g.n_cells);
  }
  return f;
}

/// Dense Dirichlet Laplacian, assembled entry by entry.
inline Eigen::MatrixXd dense_laplacian(const Grid& g) {
  const Index m = g.interior();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  const double inv = 1.0 / (g.dx * g.dx);
  for (Index j = 0; j < m; ++j) {
    a(j, j) = -2.0 * inv;
    if (j > 0) a(j, j - 1) = inv;
    if (j + 1 < m) a(j, j + 1) = inv;
  }
  return a;
}

}  // namespace stosym::testing
