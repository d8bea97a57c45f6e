#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stosym/field.hpp"

namespace stosym {

/// splitmix64 finalizer; used to derive independent per-path seeds.
std::uint64_t mix_seed(std::uint64_t value);

/**
 * Deterministic stream of standard normal draws.
 *
 * Every Monte-Carlo path owns one, keyed by (master_seed, path_index), so a
 * path's increments do not depend on which worker runs it.
 */
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  GaussianStream(std::uint64_t master_seed, std::uint64_t path_index)
      : engine_(mix_seed(mix_seed(master_seed) ^ (path_index + 0x9e3779b97f4a7c15ULL))) {}

  double next() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class NoiseKind { sine, constant, sampled };

/**
 * Finite Q-Wiener process W(t) = sum_l beta_l(t) Q^{1/2} e_l, stored as
 * the sampled mode shapes Q^{1/2} e_l (one column per mode) together with
 * aleph_Q(x) = sum_l (Q^{1/2} e_l(x))^2.
 */
struct NoiseModel {
  Grid grid;
  NoiseKind kind = NoiseKind::sampled;
  Eigen::MatrixXd mode_shapes;  // m x M
  RealField aleph_q;
  double amplitude = 0.0;  // constant kind only

  Index mode_count() const { return mode_shapes.cols(); }
  RealField mode_shape(Index l) const { return RealField(grid, mode_shapes.col(l)); }
  /// sum_l draws_l * shape_l
  RealField assemble(const Eigen::VectorXd& draws) const;
};

NoiseModel build_noise_from_shapes(const Grid& grid, const std::vector<RealField>& shapes);
/// Modes l^{-p} sin(pi l x), l = 1..M.
NoiseModel build_sine_noise(const Grid& grid, int mode_count, double decay_p);
/// Single spatially constant mode.
NoiseModel build_constant_noise(const Grid& grid, double amplitude);

struct WienerIncrement {
  Eigen::VectorXd mode_draws;  // xi_l sqrt(dt), or zeta_l sqrt(dt) once truncated
  RealField field;
  double dt = 0.0;
  bool truncated = false;
};

WienerIncrement make_increment(const NoiseModel& model, Eigen::VectorXd draws, double dt, bool truncated = false);
WienerIncrement sample_increment(const NoiseModel& model, double dt, GaussianStream& stream);

/// A_dt = sqrt(2 k |ln dt|).
double truncation_level(double dt, int k);
/// Clamp each standardized draw to [-A_dt, A_dt].
WienerIncrement truncate_increment(const NoiseModel& model, const WienerIncrement& incr, int k = 2);

struct CoupledIncrements {
  WienerIncrement coarse;
  std::vector<WienerIncrement> fine;
};

/// Draws r fine increments at dt_coarse / r and sums them into the coarse one.
CoupledIncrements refine_and_sum(const NoiseModel& model, double dt_coarse, int refinement, GaussianStream& stream);

/// Coarse increment whose draws are the sequential sums of `fine_draws` columns [first, first + count).
WienerIncrement sum_increments(const NoiseModel& model, const Eigen::MatrixXd& fine_draws, Index first, Index count,
                               double dt_coarse);

}  // namespace stosym
