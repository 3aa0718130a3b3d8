#pragma once

#include <string>
#include <vector>

#include "iqcrad/model.hpp"
#include "iqcrad/radius.hpp"
#include "iqcrad/worstcase.hpp"

namespace iqcrad {

/// V_k = x_k^T P x_k + sum_i lambda_i S_i(k) and its differences, next to the
/// direct quadratic form [x_k; u_k]^T (L(P) + sum_i lambda_i M_i) [x_k; u_k].
struct LyapunovTrace {
  std::vector<double> V;       // k = 0..N
  std::vector<double> dV;      // V_{k+1} - V_k, k = 0..N-1
  std::vector<double> direct;  // k = 0..N-1
  /// max_k |dV_k - direct_k| / (1 + |V_k| + |V_{k+1}|).
  double identity_error = 0.0;
};

LyapunovTrace lyapunov_trace(const Trajectory& traj, const SystemData& sys, const Matrix& P,
                             const std::vector<double>& lambdas, const IqcSet& iqcs);
LyapunovTrace lyapunov_trace(const Trajectory& traj, const SystemData& sys,
                             const RadiusCertificate& cert, const IqcSet& iqcs);

/// max_k ||x_{k+1} - A x_k - B u_k|| / (1 + ||x_k||).
double dynamics_residual(const Trajectory& traj, const SystemData& sys);

struct Check {
  std::string name;
  bool passed = false;
  /// Measured quantity and the bound it was compared against.
  double value = 0.0;
  double bound = 0.0;
};

struct CheckReport {
  std::vector<Check> checks;
  bool passed() const;
  const Check* find(const std::string& name) const;
};

/// Re-derives the trajectory from the modes and checks dynamics, IQC partial
/// sums against beta, orthogonality of F, constancy of ||F^k v||, X v != 0,
/// the technical condition and the feedback gain.
CheckReport check_witness(const WitnessReport& report, const SystemData& sys,
                          const IqcSet& iqcs, int horizon = 10000);

/// Horizon-bounded growth facts about ||x_k||; no claims about limits.
struct BoundednessDiagnostic {
  double max_norm = 0.0;
  double final_norm = 0.0;
  /// Least-squares slope of ||x_k|| against k.
  double linear_slope = 0.0;
  /// Slope of log(1 + ||x_k||) against log(1 + k) over the second half.
  double power_exponent = 0.0;
  bool growing = false;
};

BoundednessDiagnostic boundedness_diagnostic(const Trajectory& traj);

}  // namespace iqcrad
