#include <gtest/gtest.h>

#include "iqcrad/linalg.hpp"
#include "iqcrad/verify.hpp"
#include "iqcrad/worstcase.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

namespace {

Matrix random_orthogonal(std::mt19937& rng, int d) {
  return linalg::polar_factor(random_matrix(rng, d, d));
}

void expect_sound_witness(const Instance& inst) {
  SCOPED_TRACE(inst.name);
  WorstCaseOptions opts;
  opts.horizon = 2000;
  const WorstCaseOutcome out = worst_case(inst.sys, inst.iqcs, opts);
  ASSERT_EQ(out.stage, PipelineStage::complete) << out.reason;
  ASSERT_TRUE(out.report.has_value());
  const WitnessReport& w = *out.report;
  const WorstCaseModes& m = w.modes;
  EXPECT_LE((inst.sys.A() * m.X + inst.sys.B() * m.U - m.X * m.F).norm(), 1e-8);
  EXPECT_LE((m.F.transpose() * m.F - Matrix::Identity(m.d, m.d)).norm(), 1e-9);
  ASSERT_TRUE(m.v.has_value());
  EXPECT_GT((m.X * *m.v).norm(), 1e-6);
  EXPECT_LE(dynamics_residual(w.trajectory, inst.sys), 1e-8);
  const auto sums = iqc_partial_sums(w.trajectory, inst.iqcs);
  for (std::size_t i = 0; i < sums.size(); ++i) {
    for (double s : sums[i]) ASSERT_GE(s, w.beta[i] - 1e-6);
  }
  const CheckReport checks = check_witness(w, inst.sys, inst.iqcs, 2000);
  for (const auto& c : checks.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
}

}  // namespace

TEST(RankFactor, ReproducesLowRankMatrix) {
  std::mt19937 rng(31);
  const Matrix G = random_matrix(rng, 5, 2);
  const Matrix Q = G * G.transpose();
  const RankFactor f = rank_factor(Q, 3);
  EXPECT_EQ(f.d, 2);
  Matrix XU(5, 2);
  XU << f.X, f.U;
  EXPECT_LE((XU * XU.transpose() - Q).norm(), 1e-10 * Q.norm());
}

TEST(Procrustes, RecoversOrthogonalFactor) {
  std::mt19937 rng(32);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 4;
    const int n = d + t % 3;
    Matrix X = random_matrix(rng, n, d);
    if (t % 5 == 0 && d > 1) X.col(d - 1) = X.col(0);  // rank deficient
    const Matrix F0 = random_orthogonal(rng, d);
    const Matrix F = recover_orthogonal_factor(X, X * F0);
    EXPECT_LE((X * F - X * F0).norm(), 1e-9);
    EXPECT_LE((F.transpose() * F - Matrix::Identity(d, d)).norm(), 1e-12);
  }
}

TEST(EigenGroups, ClustersRotationAngles) {
  Matrix F = Matrix::Zero(4, 4);
  F.topLeftCorner(2, 2) = rotation(0.7);
  F.bottomRightCorner(2, 2) = rotation(0.7);
  const EigenGrouping g = eigen_group(F);
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_NEAR(g.groups[0].theta, 0.7, 1e-9);
  EXPECT_EQ(g.groups[0].multiplicity(), 2);
  EXPECT_NEAR(g.groups[1].theta, 2 * M_PI - 0.7, 1e-9);
  CMatrix V(4, 4);
  int col = 0;
  for (const auto& grp : g.groups) {
    V.middleCols(col, grp.multiplicity()) = grp.W;
    col += grp.multiplicity();
  }
  EXPECT_LE((V.adjoint() * V - CMatrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(AveragedForm, KeepsRotationInvariantPart) {
  // Averaging over the rotation kills the indefinite diag(1, -1).
  const EigenGrouping g = eigen_group(rotation(0.7));
  Matrix H(2, 2);
  H << 1, 0, 0, -1;
  EXPECT_LE(averaged_form(g.groups, H).norm(), 1e-12);
  EXPECT_LE((averaged_form(g.groups, Matrix::Identity(2, 2)) - Matrix::Identity(2, 2)).norm(),
            1e-12);
}

TEST(Witness, PlaneRotation) {
  expect_sound_witness(rotation_instance());
  const WorstCaseOutcome out = worst_case(rotation_instance().sys, {});
  ASSERT_TRUE(out.report);
  const WitnessReport& w = *out.report;
  const double n0 = w.trajectory.states.front().norm();
  for (const auto& x : w.trajectory.states) EXPECT_NEAR(x.norm(), n0, 1e-9);
  EXPECT_TRUE(w.K.has_value());
}

TEST(Witness, GradientDescentAtUnitRate) { expect_sound_witness(gradient_descent(0.2)); }

TEST(Witness, RotationWithIndefiniteIqc) {
  expect_sound_witness(rotation_indefinite());
  const WorstCaseOutcome out = worst_case(rotation_indefinite().sys, rotation_indefinite().iqcs);
  ASSERT_TRUE(out.report);
  EXPECT_LT(out.report->beta[0], 0.0);
  EXPECT_TRUE(out.report->hard_shift.has_value());
}

TEST(Witness, IntegratorWithInputEnergy) { expect_sound_witness(integrator_input_energy()); }

TEST(Witness, RotationWithInput) { expect_sound_witness(rotation_with_input()); }

TEST(Pipeline, StableSystemStopsAtPrecheck) {
  const WorstCaseOutcome out =
      worst_case(SystemData::autonomous(Matrix::Constant(1, 1, 0.5)), {});
  EXPECT_EQ(out.stage, PipelineStage::radius_precheck);
  EXPECT_FALSE(out.report.has_value());
}

TEST(Pipeline, ScalarExampleHasNoWitness) {
  IqcSet q;
  q.add(Matrix::Constant(1, 1, 1.0));
  q.add(Matrix::Constant(1, 1, -1.0));
  const SystemData sys = SystemData::autonomous(Matrix::Ones(1, 1));
  EXPECT_FALSE(worst_case(sys, q).report.has_value());
  WorstCaseOptions skip;
  skip.skip_precheck = true;
  const WorstCaseOutcome out = worst_case(sys, q, skip);
  EXPECT_EQ(out.stage, PipelineStage::dual_extraction);
  EXPECT_EQ(extract_dual_witness(sys, q).status, DualWitness::Status::infeasible);
}

TEST(Pipeline, RankDeficientInputRejected) {
  Matrix B(2, 2);
  B << 1, 1, 0, 0;
  Matrix M = Matrix::Zero(4, 4);
  M(2, 2) = M(3, 3) = -1;
  IqcSet q;
  q.add(M);
  WorstCaseOptions skip;
  skip.skip_precheck = true;
  const WorstCaseOutcome out = worst_case(SystemData(rotation(0.7), B), q, skip);
  EXPECT_EQ(out.stage, PipelineStage::input_rank);
}

TEST(Pipeline, StageNames) {
  EXPECT_EQ(to_string(PipelineStage::dual_extraction), "dual-extraction");
  EXPECT_EQ(to_string(PipelineStage::technical_condition), "technical-condition");
}

TEST(FeedbackGain, InputIsLinearInState) {
  const WorstCaseOutcome out =
      worst_case(integrator_input_energy().sys, integrator_input_energy().iqcs);
  ASSERT_TRUE(out.report && out.report->K);
  const WitnessReport& w = *out.report;
  for (int k = 0; k < w.trajectory.steps(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    ASSERT_LE((w.trajectory.inputs[i] - *w.K * w.trajectory.states[i]).norm(), 1e-6);
  }
}
