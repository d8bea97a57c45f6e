#include <gtest/gtest.h>

#include <cmath>

#include "stosym/tableau.hpp"

namespace stosym {
namespace {

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

TEST(Tableau, MidpointCoefficients) {
  const Tableau t = midpoint_tableau();
  EXPECT_EQ(t.stages, 1);
  EXPECT_EQ(t.a0(0, 0), 0.5);
  EXPECT_EQ(t.a1(0, 0), 0.5);
  EXPECT_EQ(t.b0(0), 1.0);
  EXPECT_EQ(t.b1(0), 1.0);
  EXPECT_NO_THROW(validate(t));
}

TEST(Tableau, MidpointIsExactlySymplectic) {
  const SymplecticCheck c = is_symplectic(midpoint_tableau(), 0.0);
  EXPECT_TRUE(c.symplectic);
  EXPECT_EQ(c.max_defect, 0.0);
}

TEST(Tableau, ExplicitAnalogueHasUnitDefect) {
  const SymplecticCheck c = is_symplectic(explicit_euler_tableau());
  EXPECT_FALSE(c.symplectic);
  EXPECT_EQ(c.max_defect, 1.0);
  const SymplecticCheck loose = is_symplectic(explicit_euler_tableau(), 2.0);
  EXPECT_TRUE(loose.symplectic);
  EXPECT_EQ(loose.max_defect, 1.0);
}

TEST(Tableau, DefectFamiliesByHand) {
  Tableau t;
  t.stages = 2;
  t.a0.resize(2, 2);
  t.a0 << 0.1, 0.2, 0.3, 0.4;
  t.a1.resize(2, 2);
  t.a1 << 0.0, 0.5, -0.5, 1.0;
  t.b0 = Eigen::Vector2d(0.6, 0.4);
  t.b1 = Eigen::Vector2d(1.0, -1.0);
  const SymplecticDefects d = symplectic_defects(t);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_DOUBLE_EQ(d.drift_drift(i, j), t.b0(i) * t.b0(j) - t.b0(i) * t.a0(i, j) - t.b0(j) * t.a0(j, i));
      EXPECT_DOUBLE_EQ(d.drift_noise(i, j), t.b0(i) * t.b1(j) - t.b0(i) * t.a1(i, j) - t.b1(j) * t.a0(j, i));
      EXPECT_DOUBLE_EQ(d.noise_noise(i, j), t.b1(i) * t.b1(j) - t.b1(i) * t.a1(i, j) - t.b1(j) * t.a1(j, i));
    }
  }
}

TEST(Tableau, DriftFamilyIsExactlySymmetric) {
  Tableau t = gauss2();
  t.a0(0, 1) += 0.013;
  t.b0(1) = 0.37;
  const SymplecticDefects d = symplectic_defects(t);
  EXPECT_EQ(d.drift_drift(0, 1), d.drift_drift(1, 0));
  EXPECT_EQ(d.noise_noise(0, 1), d.noise_noise(1, 0));
}

TEST(Tableau, GaussLegendreTwoStageIsSymplectic) {
  const SymplecticCheck c = is_symplectic(gauss2());
  EXPECT_TRUE(c.symplectic) << c.max_defect;
}

TEST(Tableau, ValidateNamesOffendingBlock) {
  Tableau t = midpoint_tableau();
  t.b0 = Eigen::Vector2d(1.0, 0.0);
  try {
    validate(t);
    FAIL() << "expected TableauError";
  } catch (const TableauError& e) {
    EXPECT_NE(std::string(e.what()).find("b0"), std::string::npos) << e.what();
  }
  Tableau u = midpoint_tableau();
  u.a1 = Eigen::MatrixXd::Zero(2, 1);
  try {
    validate(u);
    FAIL() << "expected TableauError";
  } catch (const TableauError& e) {
    EXPECT_NE(std::string(e.what()).find("a1"), std::string::npos) << e.what();
  }
}

TEST(Tableau, RejectsZeroStages) {
  Tableau t;
  t.stages = 0;
  EXPECT_THROW(validate(t), TableauError);
}

TEST(Tableau, RejectsNonFiniteCoefficients) {
  Tableau t = midpoint_tableau();
  t.a0(0, 0) = std::nan("");
  EXPECT_THROW(validate(t), TableauError);
}

}  // namespace
}  // namespace stosym
