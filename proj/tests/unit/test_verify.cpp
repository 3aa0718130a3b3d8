#include <gtest/gtest.h>

#include "iqcrad/radius.hpp"
#include "iqcrad/verify.hpp"
#include "iqcrad/worstcase.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

TEST(LyapunovTrace, DifferenceMatchesQuadraticForm) {
  const Instance gd = gradient_descent(0.15);
  const RadiusCertificate c = spectral_radius(gd.sys, gd.iqcs);
  std::vector<Vector> u;
  Vector x = Vector::Constant(1, 3.0);
  // u = h x with h in [1, 10] satisfies the sector IQC pointwise.
  for (int k = 0; k < 30; ++k) {
    u.push_back(Vector::Constant(1, (1 + k % 9) * x(0)));
    x = gd.sys.A() * x + gd.sys.B() * u.back();
  }
  const Trajectory t = simulate(gd.sys, Vector::Constant(1, 3.0), u);
  const LyapunovTrace tr = lyapunov_trace(t, gd.sys, c.P, c.lambdas, gd.iqcs);
  EXPECT_LE(tr.identity_error, 1e-12);
  ASSERT_EQ(tr.V.size(), 31u);
  EXPECT_THROW(lyapunov_trace(t, gd.sys, c.P, {}, gd.iqcs), DimensionError);
}

TEST(DynamicsResidual, DetectsBrokenStep) {
  Trajectory t = simulate(rotation_instance().sys, Vector::Ones(2), 10);
  EXPECT_LE(dynamics_residual(t, rotation_instance().sys), 1e-15);
  t.states[5](0) += 1.0;
  EXPECT_GT(dynamics_residual(t, rotation_instance().sys), 0.1);
}

TEST(CheckWitness, FlagsCorruption) {
  const Instance inst = rotation_indefinite();
  const WorstCaseOutcome out = worst_case(inst.sys, inst.iqcs);
  ASSERT_TRUE(out.report);
  EXPECT_TRUE(check_witness(*out.report, inst.sys, inst.iqcs, 1000).passed());

  WitnessReport bad_f = *out.report;
  bad_f.modes.F(0, 0) += 0.1;
  const CheckReport r1 = check_witness(bad_f, inst.sys, inst.iqcs, 1000);
  EXPECT_FALSE(r1.passed());
  EXPECT_FALSE(r1.find("orthogonality")->passed);

  // A zero v gives the zero trajectory.
  WitnessReport bad_v = *out.report;
  bad_v.modes.v = Vector::Zero(2);
  EXPECT_FALSE(check_witness(bad_v, inst.sys, inst.iqcs, 1000).find("state-nonzero")->passed);
}

TEST(Boundedness, GrowthDiagnostic) {
  const BoundednessDiagnostic grow =
      boundedness_diagnostic(simulate(SystemData::autonomous(jordan_block()), Vector::Ones(2), 200));
  EXPECT_TRUE(grow.growing);
  EXPECT_NEAR(grow.power_exponent, 1.0, 0.1);
  const BoundednessDiagnostic flat =
      boundedness_diagnostic(simulate(rotation_instance().sys, Vector::Ones(2), 200));
  EXPECT_FALSE(flat.growing);
  EXPECT_NEAR(flat.max_norm, std::sqrt(2.0), 1e-12);
}
