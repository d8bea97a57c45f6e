#include "stosym/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stosym {

std::uint64_t mix_seed(std::uint64_t value) {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

RealField NoiseModel::assemble(const Eigen::VectorXd& draws) const {
  if (draws.size() != mode_count()) throw std::invalid_argument("draw count does not match mode count");
  RealField f(grid);
  for (Index l = 0; l < mode_count(); ++l) f.values += draws(l) * mode_shapes.col(l);
  return f;
}

namespace {

RealField compute_aleph(const Grid& grid, const Eigen::MatrixXd& shapes) {
  RealField a(grid);
  for (Index l = 0; l < shapes.cols(); ++l) a.values += shapes.col(l).cwiseAbs2();
  return a;
}

}  // namespace

NoiseModel build_noise_from_shapes(const Grid& grid, const std::vector<RealField>& shapes) {
  NoiseModel model;
  model.grid = grid;
  model.kind = NoiseKind::sampled;
  model.mode_shapes = Eigen::MatrixXd::Zero(grid.interior(), static_cast<Index>(shapes.size()));
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (!(shapes[l].grid == grid)) throw std::invalid_argument("mode shape lives on a different grid");
    model.mode_shapes.col(static_cast<Index>(l)) = shapes[l].values;
  }
  model.aleph_q = compute_aleph(grid, model.mode_shapes);
  return model;
}

NoiseModel build_sine_noise(const Grid& grid, int mode_count, double decay_p) {
  if (mode_count < 0) throw std::invalid_argument("mode count must be non-negative");
  if (!(decay_p >= 0.0)) throw std::invalid_argument("decay exponent must be non-negative");
  NoiseModel model;
  model.grid = grid;
  model.kind = NoiseKind::sine;
  model.mode_shapes.resize(grid.interior(), mode_count);
  for (int l = 1; l <= mode_count; ++l) {
    const double scale = std::pow(static_cast<double>(l), -decay_p);
    for (Index j = 0; j < grid.interior(); ++j)
      model.mode_shapes(j, l - 1) = scale * std::sin(std::numbers::pi * l * grid.x(j));
  }
  model.aleph_q = compute_aleph(grid, model.mode_shapes);
  return model;
}

NoiseModel build_constant_noise(const Grid& grid, double amplitude) {
  NoiseModel model;
  model.grid = grid;
  model.kind = NoiseKind::constant;
  model.amplitude = amplitude;
  model.mode_shapes = Eigen::MatrixXd::Constant(grid.interior(), 1, amplitude);
  model.aleph_q = compute_aleph(grid, model.mode_shapes);
  return model;
}

WienerIncrement make_increment(const NoiseModel& model, Eigen::VectorXd draws, double dt, bool truncated) {
  WienerIncrement incr;
  incr.field = model.assemble(draws);
  incr.mode_draws = std::move(draws);
  incr.dt = dt;
  incr.truncated = truncated;
  return incr;
}

WienerIncrement sample_increment(const NoiseModel& model, double dt, GaussianStream& stream) {
  if (!(dt > 0.0)) throw std::invalid_argument("increment needs dt > 0");
  const double root = std::sqrt(dt);
  Eigen::VectorXd draws(model.mode_count());
  for (Index l = 0; l < draws.size(); ++l) draws(l) = root * stream.next();
  return make_increment(model, std::move(draws), dt);
}

double truncation_level(double dt, int k) {
  if (!(dt > 0.0) || dt >= 1.0) throw std::invalid_argument("truncation needs 0 < dt < 1");
  if (k < 1) throw std::invalid_argument("truncation order k must be >= 1");
  return std::sqrt(2.0 * k * std::abs(std::log(dt)));
}

WienerIncrement truncate_increment(const NoiseModel& model, const WienerIncrement& incr, int k) {
  if (incr.truncated) throw std::invalid_argument("increment is already truncated");
  const double level = truncation_level(incr.dt, k);
  const double root = std::sqrt(incr.dt);
  // Largest stored draw whose standardized value does not exceed the level.
  double cap = level * root;
  while (cap / root > level) cap = std::nextafter(cap, 0.0);
  Eigen::VectorXd draws = incr.mode_draws;
  for (Index l = 0; l < draws.size(); ++l) {
    const double xi = draws(l) / root;
    if (xi > level)
      draws(l) = cap;
    else if (xi < -level)
      draws(l) = -cap;
  }
  return make_increment(model, std::move(draws), incr.dt, true);
}

CoupledIncrements refine_and_sum(const NoiseModel& model, double dt_coarse, int refinement, GaussianStream& stream) {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  const double dt_fine = dt_coarse / refinement;
  CoupledIncrements out;
  Eigen::MatrixXd fine_draws(model.mode_count(), refinement);
  for (int i = 0; i < refinement; ++i) {
    out.fine.push_back(sample_increment(model, dt_fine, stream));
    fine_draws.col(i) = out.fine.back().mode_draws;
  }
  out.coarse = sum_increments(model, fine_draws, 0, refinement, dt_coarse);
  return out;
}

WienerIncrement sum_increments(const NoiseModel& model, const Eigen::MatrixXd& fine_draws, Index first, Index count,
                               double dt_coarse) {
  if (first < 0 || count < 1 || first + count > fine_draws.cols())
    throw std::invalid_argument("coarse interval outside the fine increment sequence");
  Eigen::VectorXd draws = Eigen::VectorXd::Zero(fine_draws.rows());
  for (Index c = first; c < first + count; ++c) draws += fine_draws.col(c);
  return make_increment(model, std::move(draws), dt_coarse);
}

}  // namespace stosym
