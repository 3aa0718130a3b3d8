#include <gtest/gtest.h>

#include "iqcrad/linalg.hpp"
#include "iqcrad/model.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

TEST(SystemData, AcceptsZeroColumnInput) {
  const SystemData sys(Matrix::Identity(3, 3), Matrix(3, 0));
  EXPECT_EQ(sys.n(), 3);
  EXPECT_EQ(sys.m(), 0);
  EXPECT_EQ(sys.AB().cols(), 3);
}

TEST(SystemData, RejectsBadShapes) {
  EXPECT_THROW(SystemData(Matrix::Zero(2, 3), Matrix(2, 0)), DimensionError);
  EXPECT_THROW(SystemData(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), DimensionError);
  EXPECT_THROW(SystemData(Matrix(0, 0), Matrix(0, 0)), DimensionError);
  Matrix A = Matrix::Zero(1, 1);
  A(0, 0) = std::nan("");
  EXPECT_THROW(SystemData(A, Matrix(1, 0)), DimensionError);
}

TEST(IqcSet, SymmetrizesAndWarns) {
  IqcSet q;
  Matrix M(2, 2);
  M << 1, 2, 0, 1;
  q.add(M);
  EXPECT_DOUBLE_EQ(q[0](0, 1), 1.0);
  EXPECT_DOUBLE_EQ(q[0](1, 0), 1.0);
  EXPECT_EQ(q.warnings().size(), 1u);
  q.add(Matrix::Identity(2, 2));
  EXPECT_EQ(q.warnings().size(), 1u);
}

TEST(IqcSet, ChecksSizes) {
  IqcSet q;
  q.add(Matrix::Identity(2, 2));
  EXPECT_THROW(q.add(Matrix::Identity(3, 3)), DimensionError);
  EXPECT_THROW(q.add(Matrix::Zero(2, 3)), DimensionError);
  const SystemData sys(Matrix::Identity(2, 2), Matrix::Zero(2, 1));
  EXPECT_THROW(q.check_compatible(sys), DimensionError);
  EXPECT_NO_THROW(q.check_compatible(SystemData::autonomous(Matrix::Identity(2, 2))));
}

TEST(LyapunovOperator, MatchesBlockFormula) {
  std::mt19937 rng(1);
  const SystemData sys(random_matrix(rng, 3, 3), random_matrix(rng, 3, 2));
  const Matrix P = random_symmetric(rng, 3);
  const Matrix L = lyapunov_operator(P, sys, 0.7);
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  EXPECT_LT((L.topLeftCorner(3, 3) - (A.transpose() * P * A - 0.49 * P)).norm(), 1e-12);
  EXPECT_LT((L.topRightCorner(3, 2) - A.transpose() * P * B).norm(), 1e-12);
  EXPECT_LT((L.bottomRightCorner(2, 2) - B.transpose() * P * B).norm(), 1e-12);
  EXPECT_EQ((L - L.transpose()).norm(), 0.0);
}

TEST(LyapunovOperator, AdjointIdentity) {
  std::mt19937 rng(2);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 4, m = t % 3;
    const SystemData sys(random_matrix(rng, n, n), random_matrix(rng, n, m));
    const Matrix P = random_symmetric(rng, n);
    const Matrix Q = random_symmetric(rng, n + m);
    const double lhs = inner(Q, lyapunov_operator(P, sys, 1.3));
    const double rhs = inner(lyapunov_adjoint(Q, sys, 1.3), P);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST(LyapunovOperator, RejectsWrongSizes) {
  const SystemData sys = SystemData::autonomous(Matrix::Identity(2, 2));
  EXPECT_THROW(lyapunov_operator(Matrix::Identity(3, 3), sys), DimensionError);
  EXPECT_THROW(lyapunov_adjoint(Matrix::Identity(3, 3), sys), DimensionError);
  EXPECT_THROW(lyapunov_operator(Matrix::Identity(2, 2), sys, 0.0), std::invalid_argument);
}

TEST(Simulate, FollowsDynamics) {
  const SystemData sys(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0));
  std::vector<Vector> u(3, Vector::Constant(1, 1.0));
  const Trajectory t = simulate(sys, Vector::Constant(1, 2.0), u);
  ASSERT_EQ(t.states.size(), 4u);
  EXPECT_DOUBLE_EQ(t.states[1](0), 2.0);
  EXPECT_DOUBLE_EQ(t.states[2](0), 2.0);
  EXPECT_DOUBLE_EQ(t.states[3](0), 2.0);
  EXPECT_NO_THROW(t.validate(sys));
  EXPECT_THROW(simulate(sys, Vector::Constant(2, 1.0), u), DimensionError);
  EXPECT_THROW(simulate(sys, Vector::Constant(1, 1.0), 3), DimensionError);
}

TEST(Simulate, JordanBlockGrowsLinearly) {
  const Trajectory t = simulate(SystemData::autonomous(jordan_block()), Vector::Ones(2), 100);
  for (int k = 0; k <= 100; ++k) EXPECT_GE(t.states[static_cast<std::size_t>(k)].norm(), k / 2.0);
}

TEST(PartialSums, AccumulateQuadraticForms) {
  const SystemData sys = SystemData::autonomous(Matrix::Constant(1, 1, 2.0));
  IqcSet q;
  q.add(Matrix::Constant(1, 1, 1.0));
  const auto S = iqc_partial_sums(simulate(sys, Vector::Ones(1), 3), q);
  ASSERT_EQ(S.size(), 1u);
  EXPECT_EQ(S[0], (std::vector<double>{1, 5, 21}));
}

TEST(Linalg, PolarFactorIsOrthogonal) {
  std::mt19937 rng(3);
  const Matrix M = random_matrix(rng, 4, 4);
  const Matrix U = linalg::polar_factor(M);
  EXPECT_LT((U.transpose() * U - Matrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_NEAR(linalg::spectral_radius(rotation(0.3) * 0.9), 0.9, 1e-12);
}

TEST(Linalg, NullSpaceAndPseudoInverse) {
  Matrix M(1, 3);
  M << 1, 1, 0;
  const Matrix N = linalg::null_space(M);
  EXPECT_EQ(N.cols(), 2);
  EXPECT_LT((M * N).norm(), 1e-12);
  const Matrix Mp = linalg::pseudo_inverse(M);
  EXPECT_LT((M * Mp * M - M).norm(), 1e-12);
}
