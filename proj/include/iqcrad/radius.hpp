#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "iqcrad/lyapunov_sdp.hpp"
#include "iqcrad/model.hpp"
#include "iqcrad/sdp.hpp"

namespace iqcrad {

struct RadiusOptions {
  double bisect_tol = 1e-6;
  double rho_max = 1e3;
  /// Margin threshold separating strict from non-strict feasibility.
  double strict_eps = 1e-8;
  /// Bound on tr(P) + sum lambda per state/IQC during bisection probes.
  double probe_budget = 1e3;
  /// Same bound for the attainment probe; larger so that attained optima fit.
  double attain_budget = 1e4;
  sdp::SolverConfig solver;
};

/// Result of the bisection on the LMI
///   L_rho(P) + sum_i lambda_i M_i <= 0,  P >= I,  lambda >= 0.
struct RadiusCertificate {
  /// +inf when no feasible rho <= rho_max was found.
  double rho = std::numeric_limits<double>::infinity();
  Matrix P;
  std::vector<double> lambdas;
  bool attained = false;
  /// lambda_max of the LMI matrix at rho_hi for (P, lambda).
  double margin = 0.0;
  /// Margin reported by the attainment probe at rho.
  double attainment_margin = 0.0;
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  int probes = 0;
  std::vector<std::string> diagnostics;

  bool finite() const { return std::isfinite(rho); }
};

/// Bisection on rho. Each probe runs in coordinates adapted to the previous
/// feasible P, which keeps nearly defective problems well conditioned.
RadiusCertificate spectral_radius(const SystemData& sys, const IqcSet& iqcs,
                                  const RadiusOptions& opts = {});

struct AttainmentResult {
  bool attained = false;
  /// False when the solver did not return a usable point.
  bool conclusive = true;
  double margin = 0.0;
  Matrix P;
  std::vector<double> lambdas;
  std::string diagnostic;
};

/// Non-strict feasibility of the LMI at exactly `rho` (margin <= strict_eps),
/// with P >= I and a bounded multiplier budget.
AttainmentResult attainment_check(const SystemData& sys, const IqcSet& iqcs, double rho,
                                  const RadiusOptions& opts = {});

struct RateCertificate {
  bool valid = false;
  double rho = 0.0;
  RadiusCertificate certificate;
  /// Set when `valid` is false.
  std::string reason;
};

/// Exponential rate rho with a certificate obtained on the scaled pair
/// (A/rho, B/rho) at radius 1. Applies to trajectories satisfying the
/// rho-weighted IQCs sum_k rho^{-2k} [x_k; u_k]^T M_i [x_k; u_k] >= beta.
RateCertificate exponential_rate_certificate(const SystemData& sys, const IqcSet& iqcs,
                                             const RadiusOptions& opts = {});

struct StrengthenedCertificate {
  bool found = false;
  Matrix P;
  std::vector<double> lambdas;
  /// lambda_max(L_rho(P) + sum lambda M + diag(I, 0)); <= 0 when found.
  double margin = 0.0;
  std::string diagnostic;
};

/// Finds (P, lambda) with L_rho(P) + sum lambda_i M_i <= -diag(I, 0), so that
/// the Lyapunov difference satisfies Delta V_k <= -||x_k||^2.
StrengthenedCertificate strengthened_certificate(const SystemData& sys, const IqcSet& iqcs,
                                                 double rho = 1.0,
                                                 const RadiusOptions& opts = {});

/// For m = 0 with a defective eigenvalue on the unit circle: an initial state
/// in a Jordan chain, whose free response grows at least linearly.
struct DefectiveDiagnostic {
  std::complex<double> eigenvalue;
  Vector x0;
  Trajectory trajectory;
  /// Least-squares slope of ||x_k|| against k over the simulated horizon.
  double growth_slope = 0.0;
};

std::optional<DefectiveDiagnostic> defective_unit_circle_diagnostic(const SystemData& sys,
                                                                    int horizon = 100,
                                                                    double tol = 1e-6);

}  // namespace iqcrad
