#include <gtest/gtest.h>

#include "iqcrad/stability.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

TEST(Classify, StableGradientDescent) {
  const Instance gd = gradient_descent(0.15);
  const StabilityVerdict v = classify(gd.sys, gd.iqcs);
  EXPECT_EQ(v.classification, Classification::asymptotically_stable);
  EXPECT_NEAR(v.certificate.rho, 0.85, 1e-3);
  EXPECT_FALSE(v.witness.has_value());
}

TEST(Classify, RotationIsBoundedButNotConvergent) {
  const Instance rot = rotation_instance();
  const StabilityVerdict v = classify(rot.sys, rot.iqcs);
  EXPECT_EQ(v.classification, Classification::witness_unstable);
  EXPECT_TRUE(v.robustly_bounded);
  EXPECT_TRUE(v.witness.has_value());
}

TEST(Classify, JordanBlockGrows) {
  const StabilityVerdict v = classify(SystemData::autonomous(jordan_block()), {});
  EXPECT_FALSE(v.robustly_bounded);
  EXPECT_FALSE(v.certificate.attained);
  ASSERT_TRUE(v.growth.has_value());
  for (int k = 0; k <= 100; ++k) {
    EXPECT_GE(v.growth->trajectory.states[static_cast<std::size_t>(k)].norm(),
              k / 2.0 * v.growth->x0.norm() / std::sqrt(2.0));
  }
}

TEST(Classify, UnstableIsInconclusive) {
  const StabilityVerdict v = classify(SystemData::autonomous(Matrix::Constant(1, 1, 2.0)), {});
  EXPECT_EQ(v.classification, Classification::inconclusive);
  EXPECT_NEAR(v.certificate.rho, 2.0, 1e-5);
}

TEST(Classify, ScalarExampleIsStable) {
  IqcSet q;
  q.add(Matrix::Constant(1, 1, 1.0));
  q.add(Matrix::Constant(1, 1, -1.0));
  const StabilityVerdict v = classify(SystemData::autonomous(Matrix::Ones(1, 1)), q);
  EXPECT_EQ(v.classification, Classification::asymptotically_stable);
}

TEST(Classify, Names) {
  EXPECT_EQ(to_string(Classification::asymptotically_stable), "asymptotically-stable");
  EXPECT_EQ(to_string(Classification::witness_unstable), "witness-unstable");
}
