#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stosym/integrator.hpp"
#include "test_support.hpp"

namespace stosym {
namespace {

using testing::random_smooth_field;
using testing::sin_pi;

const double kSqrt2 = std::numbers::sqrt2;

Tableau gauss2() {
  const double r = std::sqrt(3.0) / 6.0;
  Tableau t;
  t.stages = 2;
  t.a0.resize(2, 2);
  t.a0 << 0.25, 0.25 - r, 0.25 + r, 0.25;
  t.a1 = t.a0;
  t.b0 = Eigen::Vector2d(0.5, 0.5);
  t.b1 = t.b0;
  return t;
}

WienerIncrement zero_increment(const NoiseModel& model, double dt) {
  return make_increment(model, Eigen::VectorXd::Zero(model.mode_count()), dt, true);
}

WienerIncrement truncated_increment(const NoiseModel& model, double dt, GaussianStream& stream) {
  return truncate_increment(model, sample_increment(model, dt, stream), 2);
}

ComplexField eigen_field(const Grid& g, int k) {
  return ComplexField(g, laplacian_eigenvector(g, k).values.cast<Complex>());
}

double rel_l2(const ComplexField& a, const ComplexField& b) {
  return (a.values - b.values).norm() / std::max(1e-300, b.values.norm());
}

TEST(Nonlinearity, CubicCallbacks) {
  const Nonlinearity nl = Nonlinearity::cubic(1.0);
  EXPECT_EQ(nl.psi_prime(3.0, 0.0, 0.0), 3.0);
  EXPECT_EQ(nl.psi_double_prime(3.0, 0.0, 0.0), 1.0);
  EXPECT_EQ(nl.psi(3.0, 0.0), 4.5);
}

TEST(SolverParams, Validation) {
  EXPECT_NO_THROW(validate(SolverParams{}));
  EXPECT_THROW(validate(SolverParams{0.0}), std::invalid_argument);
  EXPECT_THROW(validate(SolverParams{1e-12, 0}), std::invalid_argument);
}

TEST(Midpoint, LinearDeterministicIsCayleyMap) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  std::mt19937_64 rng(1);
  const ComplexField f = testing::random_field(g, rng);
  const double dt = 0.01;
  const StepOutcome out = midpoint_step(f, Nonlinearity::linear(0.0), dt, 0.0, zero_increment(noise, dt), {});
  EXPECT_LT(rel_l2(out.state, cayley_apply(f, dt).s_hat_f), 1e-14);
  EXPECT_LE(out.iterations, 2);
}

TEST(Midpoint, ZeroIsAFixedPoint) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 2, 1.0);
  GaussianStream stream(3);
  const double dt = 0.01;
  const StepOutcome out =
      midpoint_step(ComplexField(g), Nonlinearity::cubic(kSqrt2), dt, 0.0, truncated_increment(noise, dt, stream), {});
  EXPECT_EQ(out.state.values.norm(), 0.0);
}

TEST(Midpoint, RequiresTruncatedNoiseUnlessOverridden) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 1, 1.0);
  GaussianStream stream(3);
  const WienerIncrement raw = sample_increment(noise, 0.01, stream);
  const Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  EXPECT_THROW(midpoint_step(sin_pi(g), nl, 0.01, 0.0, raw, {}), std::invalid_argument);
  SolverParams sp;
  sp.require_truncated_noise = false;
  EXPECT_NO_THROW(midpoint_step(sin_pi(g), nl, 0.01, 0.0, raw, sp));
}

TEST(Midpoint, RejectsMismatchedIncrement) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 1, 1.0);
  EXPECT_THROW(midpoint_step(sin_pi(g), Nonlinearity::cubic(0.0), 0.01, 0.0, zero_increment(noise, 0.02), {}),
               std::invalid_argument);
}

TEST(Midpoint, ConstantNoiseConservesCharge) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_constant_noise(g, 1.0);
  const Nonlinearity nl = Nonlinearity::linear(kSqrt2);
  GaussianStream stream(17);
  const SolverParams sp;
  ComplexField f = sin_pi(g);
  const double dt = std::ldexp(1.0, -7);
  for (int n = 0; n < 32; ++n) {
    const double before = discrete_charge(f);
    f = midpoint_step(f, nl, dt, n * dt, truncated_increment(noise, dt, stream), sp).state;
    EXPECT_NEAR(discrete_charge(f), before, 100.0 * sp.fp_tol * before);
  }
}

TEST(Midpoint, CubicStochasticConservesCharge) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_sine_noise(g, 4, 1.0);
  const Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  GaussianStream stream(18);
  const SolverParams sp;
  ComplexField f = sin_pi(g);
  const double dt = std::ldexp(1.0, -7);
  const double c0 = discrete_charge(f);
  for (int n = 0; n < 32; ++n) {
    const double before = discrete_charge(f);
    f = midpoint_step(f, nl, dt, n * dt, truncated_increment(noise, dt, stream), sp).state;
    EXPECT_NEAR(discrete_charge(f), before, 100.0 * sp.fp_tol * c0);
  }
}

TEST(Midpoint, RichardsonLocalErrorIsThirdOrder) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  const Nonlinearity nl = Nonlinearity::cubic(0.0);
  SolverParams sp;
  sp.fp_tol = 1e-15;
  const ComplexField f = sin_pi(g);
  auto local_gap = [&](double dt) {
    const ComplexField one = midpoint_step(f, nl, dt, 0.0, zero_increment(noise, dt), sp).state;
    const double h = dt / 2;
    const ComplexField half = midpoint_step(f, nl, h, 0.0, zero_increment(noise, h), sp).state;
    const ComplexField two = midpoint_step(half, nl, h, h, zero_increment(noise, h), sp).state;
    return l2_norm((one.values - two.values).eval(), g.dx);
  };
  const double ratio = local_gap(2e-3) / local_gap(1e-3);
  EXPECT_GT(ratio, 6.0);
  EXPECT_LT(ratio, 10.0);
}

TEST(Midpoint, ReportsNonConvergence) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  SolverParams sp;
  sp.max_iter = 1;
  try {
    midpoint_step(sin_pi(g), Nonlinearity::cubic(0.0), 0.1, 0.0, zero_increment(noise, 0.1), sp);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalError::Kind::non_convergence);
    EXPECT_GT(e.value(), 0.0);
    EXPECT_FALSE(e.step().has_value());
  }
}

TEST(Midpoint, ReportsDivergence) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  ComplexField big = sin_pi(g);
  big.values *= 50.0;
  try {
    midpoint_step(big, Nonlinearity::cubic(0.0), 0.1, 0.0, zero_increment(noise, 0.1), {});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalError::Kind::divergence);
  }
}

TEST(Srk, MidpointTableauReducesToCayleyMapOnEigenvector) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  const double dt = 0.01;
  for (int k : {1, 4, 31}) {
    const ComplexField v = eigen_field(g, k);
    const StepOutcome out =
        srk_step(v, midpoint_tableau(), Nonlinearity::linear(0.0), dt, 0.0, zero_increment(noise, dt), {});
    const double lambda = laplacian_eigenvalue(g, k);
    const Complex mult = Complex(1.0, dt * lambda / 2.0) / Complex(1.0, -dt * lambda / 2.0);
    EXPECT_LT((out.state.values - mult * v.values).norm(), 1e-12 * v.values.norm()) << "k=" << k;
    EXPECT_LT(rel_l2(out.state, cayley_apply(v, dt).s_hat_f), 1e-12);
  }
}

TEST(Srk, ZeroIsAFixedPoint) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 1, 1.0);
  GaussianStream stream(4);
  const StepOutcome out = srk_step(ComplexField(g), gauss2(), Nonlinearity::cubic(kSqrt2), 0.01, 0.0,
                                   truncated_increment(noise, 0.01, stream), {});
  EXPECT_EQ(out.state.values.norm(), 0.0);
}

TEST(Srk, AgreesWithMidpointStep) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_sine_noise(g, 4, 1.0);
  const Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  const SolverParams sp;
  GaussianStream stream(5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexField f = random_smooth_field(g, rng);
    const double dt = std::ldexp(1.0, -7 - trial % 4);
    const WienerIncrement incr = truncated_increment(noise, dt, stream);
    const ComplexField a = midpoint_step(f, nl, dt, 0.1, incr, sp).state;
    const ComplexField b = srk_step(f, midpoint_tableau(), nl, dt, 0.1, incr, sp).state;
    EXPECT_LE(l2_norm((a.values - b.values).eval(), g.dx), 10.0 * sp.fp_tol) << "trial " << trial;
  }
}

TEST(Srk, SymplecticTableauxConserveCharge) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_sine_noise(g, 2, 1.0);
  const Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  const SolverParams sp;
  for (const Tableau& tab : {midpoint_tableau(), gauss2()}) {
    GaussianStream stream(6);
    ComplexField f = sin_pi(g);
    const double dt = std::ldexp(1.0, -7);
    for (int n = 0; n < 16; ++n) {
      const double before = discrete_charge(f);
      f = srk_step(f, tab, nl, dt, n * dt, truncated_increment(noise, dt, stream), sp).state;
      EXPECT_NEAR(discrete_charge(f), before, 100.0 * sp.fp_tol * before) << "stages " << tab.stages;
    }
  }
}

TEST(Srk, ExplicitTableauDoesNotConserveCharge) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  const double dt = 1e-3;
  const ComplexField f = sin_pi(g);
  const ComplexField out =
      srk_step(f, explicit_euler_tableau(), Nonlinearity::linear(0.0), dt, 0.0, zero_increment(noise, dt), {}).state;
  EXPECT_GT(discrete_charge(out) - discrete_charge(f), 1e-8);
}

TEST(Srk, RejectsInvalidTableau) {
  const Grid g = build_grid(1.0, 16);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  Tableau bad = midpoint_tableau();
  bad.b1 = Eigen::Vector2d(1.0, 1.0);
  EXPECT_THROW(srk_step(sin_pi(g), bad, Nonlinearity::linear(0.0), 0.01, 0.0, zero_increment(noise, 0.01), {}),
               TableauError);
}

TEST(Nonsymplectic, BackwardEulerMultiplier) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  const double dt = 0.01;
  for (int k : {1, 9, 31}) {
    const ComplexField v = eigen_field(g, k);
    const ComplexField out =
        nonsymplectic_step(v, Nonlinearity::linear(0.0), dt, 0.0, zero_increment(noise, dt), {}).state;
    const Complex mult = 1.0 / Complex(1.0, -dt * laplacian_eigenvalue(g, k));
    EXPECT_LT(std::abs(mult), 1.0);
    EXPECT_LT((out.values - mult * v.values).norm(), 1e-12 * v.values.norm()) << "k=" << k;
  }
}

TEST(Nonsymplectic, DeterministicLinearChargeStrictlyDecreases) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  const double dt = std::ldexp(1.0, -7);
  ComplexField f = sin_pi(g);
  for (int n = 0; n < 20; ++n) {
    const double before = discrete_charge(f);
    f = nonsymplectic_step(f, Nonlinearity::linear(0.0), dt, n * dt, zero_increment(noise, dt), {}).state;
    EXPECT_LT(discrete_charge(f), before);
  }
}

TEST(Nonsymplectic, StochasticCubicRunDriftsInCharge) {
  const Grid g = build_grid(1.0, 64);
  const NoiseModel noise = build_sine_noise(g, 1, 1.0);
  const Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  for (ComparisonNoise kind : {ComparisonNoise::additive, ComparisonNoise::multiplicative}) {
    SchemeSpec spec;
    spec.scheme = Scheme::nonsymplectic;
    spec.comparison_noise = kind;
    GaussianStream stream(8);
    const auto records = integrate_path(sin_pi(g), spec, nl, std::ldexp(1.0, -9), 128, noise, stream, {}, 128);
    EXPECT_GT(std::abs(records.back().charge - records.front().charge), 1e-3);
  }
}

TEST(Nonsymplectic, AdditiveIncrementsAreNotTruncated) {
  SchemeSpec spec;
  spec.scheme = Scheme::nonsymplectic;
  EXPECT_FALSE(spec.implicit_in_noise());
  spec.comparison_noise = ComparisonNoise::multiplicative;
  EXPECT_TRUE(spec.implicit_in_noise());
  spec.scheme = Scheme::srk;
  spec.tableau = explicit_euler_tableau();
  EXPECT_FALSE(spec.implicit_in_noise());
}

class TangentCase : public ::testing::Test {
 protected:
  Grid grid = build_grid(1.0, 16);
  NoiseModel noise = build_sine_noise(grid, 3, 1.0);
  Nonlinearity nl = Nonlinearity::cubic(kSqrt2);
  double dt = std::ldexp(1.0, -7);
};

TEST_F(TangentCase, ZeroPerturbationMapsToZero) {
  GaussianStream stream(9);
  const WienerIncrement incr = truncated_increment(noise, dt, stream);
  const StepOutcome step = midpoint_step(sin_pi(grid), nl, dt, 0.0, incr, {});
  EXPECT_EQ(tangent_step(step, ComplexField(grid), nl, dt, 0.0, incr, {}).values.norm(), 0.0);
}

TEST_F(TangentCase, LinearDeterministicTangentIsCayleyMap) {
  const Nonlinearity lin = Nonlinearity::linear(0.0);
  const WienerIncrement incr = zero_increment(noise, dt);
  const StepOutcome step = midpoint_step(sin_pi(grid), lin, dt, 0.0, incr, {});
  std::mt19937_64 rng(10);
  const ComplexField delta = testing::random_field(grid, rng);
  const ComplexField image = tangent_step(step, delta, lin, dt, 0.0, incr, {});
  EXPECT_LT(rel_l2(image, cayley_apply(delta, dt).s_hat_f), 1e-12);
}

TEST_F(TangentCase, MatchesFiniteDifferencesForEveryScheme) {
  GaussianStream stream(11);
  std::mt19937_64 rng(11);
  const double h = 1e-6;
  SchemeSpec midpoint, srk, backward;
  srk.scheme = Scheme::srk;
  srk.tableau = gauss2();
  backward.scheme = Scheme::nonsymplectic;
  backward.comparison_noise = ComparisonNoise::multiplicative;
  for (const SchemeSpec& spec : {midpoint, srk, backward}) {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexField state = random_smooth_field(grid, rng);
      const ComplexField delta = random_smooth_field(grid, rng);
      const WienerIncrement incr = truncated_increment(noise, dt, stream);
      const SolverParams sp;
      const StepOutcome base = advance(state, spec, nl, dt, 0.0, incr, sp);
      ComplexField shifted = state;
      shifted.values += h * delta.values;
      const ComplexField moved = advance(shifted, spec, nl, dt, 0.0, incr, sp).state;
      const Eigen::VectorXcd fd = (moved.values - base.state.values) / h;
      const ComplexField tangent = advance_tangent(base, delta, spec, nl, dt, 0.0, incr, sp);
      EXPECT_LE((fd - tangent.values).norm(), 1e-5 * tangent.values.norm())
          << "scheme " << static_cast<int>(spec.scheme) << " trial " << trial;
    }
  }
}

TEST(ExactPhase, ZeroEpsilonIsLinearPropagator) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_constant_noise(g, 1.0);
  const ComplexField f = sin_pi(g);
  EXPECT_LT(rel_l2(exact_phase_solution(f, Nonlinearity::linear(0.0), noise, 0.7, 0.3),
                   exact_linear_propagator(f, 0.3)),
            1e-15);
}

TEST(ExactPhase, TimeZeroRotatesPhase) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_constant_noise(g, 2.0);
  const ComplexField f = sin_pi(g);
  const ComplexField out = exact_phase_solution(f, Nonlinearity::linear(kSqrt2), noise, 0.4, 0.0);
  const Complex phase = std::polar(1.0, -kSqrt2 * 2.0 * 0.4);
  EXPECT_LT((out.values - phase * f.values).norm(), 1e-13);
  EXPECT_NEAR(discrete_charge(out), discrete_charge(f), 1e-14);
}

TEST(ExactPhase, RejectsUnsupportedProblems) {
  const Grid g = build_grid(1.0, 32);
  const ComplexField f = sin_pi(g);
  EXPECT_THROW(exact_phase_solution(f, Nonlinearity::linear(1.0), build_sine_noise(g, 1, 1.0), 0.0, 0.1),
               std::invalid_argument);
  EXPECT_THROW(exact_phase_solution(f, Nonlinearity::cubic(1.0), build_constant_noise(g, 1.0), 0.0, 0.1),
               std::invalid_argument);
}

TEST(IntegratePath, ZeroStepsRecordsInitialState) {
  const Grid g = build_grid(1.0, 16);
  GaussianStream stream(1);
  const auto records = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.01, 0, build_sine_noise(g, 0, 1.0),
                                      stream, {});
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].step, 0);
  EXPECT_NEAR(records[0].charge, 1.0, 1e-14);
}

TEST(IntegratePath, RecordsScheduleIncludesLastStep) {
  const Grid g = build_grid(1.0, 16);
  GaussianStream stream(1);
  const auto records = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.01, 10, build_sine_noise(g, 0, 1.0),
                                      stream, {}, 4);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[1].step, 4);
  EXPECT_EQ(records[2].step, 8);
  EXPECT_EQ(records[3].step, 10);
  EXPECT_DOUBLE_EQ(records[3].time, 0.1);
}

TEST(IntegratePath, StochasticMidpointChargeConstant) {
  const Grid g = build_grid(1.0, 64);
  GaussianStream stream(12345);
  const auto records = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(kSqrt2), std::ldexp(1.0, -7), 32,
                                      build_sine_noise(g, 1, 1.0), stream, {});
  for (const auto& r : records) EXPECT_NEAR(r.charge, 1.0, 1e-8);
}

TEST(IntegratePath, DeterministicMidpointEnergyConstant) {
  const Grid g = build_grid(1.0, 64);
  GaussianStream stream(1);
  const auto records = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), std::ldexp(1.0, -7), 32,
                                      build_sine_noise(g, 0, 1.0), stream, {});
  const double e0 = records.front().energy;
  for (const auto& r : records) EXPECT_NEAR(r.energy, e0, 1e-6 * std::abs(e0));
}

TEST(IntegratePath, BitwiseDeterministic) {
  const Grid g = build_grid(1.0, 32);
  const NoiseModel noise = build_sine_noise(g, 3, 1.0);
  GaussianStream a(42, 3), b(42, 3);
  const auto ra = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(kSqrt2), 0.01, 12, noise, a, {});
  const auto rb = integrate_path(sin_pi(g), {}, Nonlinearity::cubic(kSqrt2), 0.01, 12, noise, b, {});
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_TRUE((ra[i].state.values.array() == rb[i].state.values.array()).all());
    EXPECT_EQ(ra[i].energy, rb[i].energy);
  }
}

TEST(IntegratePath, ErrorCarriesStepIndex) {
  const Grid g = build_grid(1.0, 16);
  SolverParams sp;
  sp.max_iter = 3;
  GaussianStream stream(1);
  try {
    integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.05, 5, build_sine_noise(g, 0, 1.0), stream, sp);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.step().has_value());
    EXPECT_EQ(*e.step(), 1);
    EXPECT_NE(std::string(e.what()).find("at step 1"), std::string::npos);
  }
}

TEST(IntegratePath, RejectsBadArguments) {
  const Grid g = build_grid(1.0, 16);
  GaussianStream stream(1);
  const NoiseModel noise = build_sine_noise(g, 0, 1.0);
  EXPECT_THROW(integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.01, -1, noise, stream, {}),
               std::invalid_argument);
  EXPECT_THROW(integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.01, 2, noise, stream, {}, 0),
               std::invalid_argument);
  EXPECT_THROW(integrate_path(sin_pi(g), {}, Nonlinearity::cubic(0.0), 0.01, 2, build_sine_noise(build_grid(1.0, 8), 0, 1.0),
                              stream, {}),
               std::invalid_argument);
}

}  // namespace
}  // namespace stosym
