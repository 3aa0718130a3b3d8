#include <gtest/gtest.h>

#include "iqcrad/linalg.hpp"
#include "iqcrad/lyapunov_sdp.hpp"
#include "iqcrad/radius.hpp"
#include "instances.hpp"

using namespace iqcrad;
using namespace iqcrad::testing;

namespace {

// Worst contraction of x+ = (1 - a h) x over curvatures h in [mf, L], by
// iterating each scalar quadratic.
double gd_rate_by_iteration(double a, double mf, double L) {
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double h = mf + (L - mf) * i / 1000.0;
    double x = 1.0;
    for (int k = 0; k < 50; ++k) x -= a * h * x;
    worst = std::max(worst, std::pow(std::abs(x), 1.0 / 50));
  }
  return worst;
}

}  // namespace

TEST(SpectralRadius, MatchesEigenvaluesWithoutIqcs) {
  std::mt19937 rng(21);
  for (int t = 0; t < 15; ++t) {
    const int n = 1 + t % 5;
    const Matrix A = random_matrix(rng, n, n);
    const RadiusCertificate c = spectral_radius(SystemData::autonomous(A), {});
    ASSERT_TRUE(c.finite());
    EXPECT_NEAR(c.rho, linalg::spectral_radius(A), 1e-5) << A;
    EXPECT_LE(c.rho_lo, c.rho_hi);
  }
}

TEST(SpectralRadius, CertificateIsValid) {
  std::mt19937 rng(22);
  const Matrix A = random_matrix(rng, 3, 3);
  const SystemData sys = SystemData::autonomous(A);
  const RadiusCertificate c = spectral_radius(sys, {});
  EXPECT_NEAR(linalg::min_eigenvalue(c.P), 1.0, 1e-9);
  EXPECT_LT(lmi_margin(sys, {}, c.rho_hi, c.P, c.lambdas), 0.0);
  EXPECT_DOUBLE_EQ(c.margin, lmi_margin(sys, {}, c.rho_hi, c.P, c.lambdas));
}

TEST(SpectralRadius, JordanBlockIsNotAttained) {
  const RadiusCertificate c = spectral_radius(SystemData::autonomous(jordan_block()), {});
  EXPECT_NEAR(c.rho, 1.0, 1e-5);
  EXPECT_FALSE(c.attained);
}

TEST(SpectralRadius, RotationIsAttained) {
  const Instance rot = rotation_instance();
  const RadiusCertificate c = spectral_radius(rot.sys, rot.iqcs);
  EXPECT_NEAR(c.rho, 1.0, 1e-5);
  EXPECT_TRUE(c.attained);
}

TEST(SpectralRadius, ScalarExampleHasRadiusZero) {
  // A = 1, M = {+1, -1}: lambda_2 >= 1 - rho^2 makes every rho > 0 feasible.
  IqcSet q;
  q.add(Matrix::Constant(1, 1, 1.0));
  q.add(Matrix::Constant(1, 1, -1.0));
  const RadiusCertificate c = spectral_radius(SystemData::autonomous(Matrix::Ones(1, 1)), q);
  EXPECT_LE(c.rho, 1e-5);
  EXPECT_LT(c.margin, 0.0);
}

TEST(SpectralRadius, NilpotentAndZero) {
  const RadiusCertificate z = spectral_radius(SystemData::autonomous(Matrix::Zero(2, 2)), {});
  EXPECT_LE(z.rho, 1e-5);
  Matrix N = Matrix::Zero(3, 3);
  N(0, 1) = N(1, 2) = 1.0;
  EXPECT_LE(spectral_radius(SystemData::autonomous(N), {}).rho, 1e-3);
}

TEST(SpectralRadius, NoCertificateBeyondRhoMax) {
  RadiusOptions opts;
  opts.rho_max = 1.5;
  const RadiusCertificate c =
      spectral_radius(SystemData::autonomous(Matrix::Constant(1, 1, 2.0)), {}, opts);
  EXPECT_FALSE(c.finite());
  EXPECT_TRUE(std::isinf(c.rho_hi));
}

TEST(SpectralRadius, InputWithoutIqcIsUnconstrained) {
  // A free input drives the state anywhere, so no finite rho is certified.
  RadiusOptions opts;
  opts.rho_max = 10.0;
  const SystemData sys(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0));
  EXPECT_FALSE(spectral_radius(sys, {}, opts).finite());
}

TEST(GradientDescent, RateMatchesOracle) {
  for (double a : {0.02, 2.0 / 11.0, 0.15}) {
    const double oracle = std::max(std::abs(1 - a), std::abs(1 - 10 * a));
    ASSERT_NEAR(gd_rate_by_iteration(a, 1, 10), oracle, 1e-12);
    const Instance gd = gradient_descent(a);
    const RadiusCertificate c = spectral_radius(gd.sys, gd.iqcs);
    EXPECT_NEAR(c.rho, oracle, 1e-3) << "step " << a;
    EXPECT_TRUE(c.attained);
  }
}

TEST(Attainment, DistinguishesRotationFromJordan) {
  EXPECT_TRUE(attainment_check(rotation_instance().sys, {}, 1.0).attained);
  EXPECT_FALSE(attainment_check(SystemData::autonomous(jordan_block()), {}, 1.0).attained);
  EXPECT_THROW(attainment_check(rotation_instance().sys, {}, 0.0), std::invalid_argument);
}

TEST(RateCertificate, ScaledPairCertifiedAtOne) {
  const Instance gd = gradient_descent(0.15);
  const RateCertificate r = exponential_rate_certificate(gd.sys, gd.iqcs);
  ASSERT_TRUE(r.valid) << r.reason;
  EXPECT_NEAR(r.rho, 0.85, 1e-3);
  const RateCertificate j = exponential_rate_certificate(SystemData::autonomous(jordan_block()), {});
  EXPECT_FALSE(j.valid);
}

TEST(Strengthened, DescentBoundHolds) {
  const Instance gd = gradient_descent(0.15);
  const StrengthenedCertificate s = strengthened_certificate(gd.sys, gd.iqcs);
  ASSERT_TRUE(s.found) << s.diagnostic;
  EXPECT_LE(s.margin, 0.0);
  Matrix I0 = Matrix::Zero(2, 2);
  I0(0, 0) = 1.0;
  EXPECT_LE(lmi_margin(gd.sys, gd.iqcs, 1.0, s.P, s.lambdas, I0), 0.0);
  EXPECT_FALSE(strengthened_certificate(rotation_instance().sys, {}).found);
}

TEST(Defective, JordanChainGrows) {
  const auto diag = defective_unit_circle_diagnostic(SystemData::autonomous(jordan_block()));
  ASSERT_TRUE(diag.has_value());
  EXPECT_NEAR(diag->eigenvalue.real(), 1.0, 1e-12);
  EXPECT_GT(diag->growth_slope, 0.1);
  EXPECT_FALSE(defective_unit_circle_diagnostic(rotation_instance().sys).has_value());
}
