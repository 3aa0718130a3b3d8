#pragma once

#include <optional>
#include <vector>

#include "iqcrad/model.hpp"
#include "iqcrad/sdp.hpp"

namespace iqcrad {

struct MarginOptions {
  /// If set, adds tr(P) + sum_i lambda_i ||M_i|| <= budget. Without it a
  /// strictly feasible LMI makes the margin unbounded below.
  std::optional<double> budget;
  /// Constant added inside the LMI, e.g. diag(I, 0) for a strengthened
  /// certificate. Empty means zero.
  Matrix offset;
  /// Scale each M_i to unit Frobenius norm before solving (the budget then
  /// counts multipliers of the normalized matrices).
  bool normalize_iqcs = true;
};

struct MarginPrimal {
  sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
  /// Optimal s; -inf when unbounded below.
  double s_star = 0.0;
  Matrix P;
  /// Multipliers for the IQC matrices as given (not normalized).
  std::vector<double> lambdas;
  sdp::SdpSolution raw;
};

/// minimize s  s.t.  s I >= L_rho(P) + sum_i lambda_i M_i + offset,
///                   P >= I,  lambda_i >= 0.
MarginPrimal solve_margin_primal(const SystemData& sys, const IqcSet& iqcs, double rho,
                                 const sdp::SolverConfig& config = {},
                                 const MarginOptions& options = {},
                                 const sdp::SdpSolver& solver = sdp::default_solver());

struct MarginDual {
  sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
  double d_star = 0.0;
  Matrix Q;
  sdp::SdpSolution raw;
};

/// maximize tr(L_rho^*(Q))  s.t.  L_rho^*(Q) >= 0, tr(Q M_i) >= 0, Q >= 0,
///                                tr(Q) = 1.
MarginDual solve_margin_dual(const SystemData& sys, const IqcSet& iqcs, double rho,
                             const sdp::SolverConfig& config = {},
                             const sdp::SdpSolver& solver = sdp::default_solver());

/// lambda_max(L_rho(P) + sum_i lambda_i M_i + offset), evaluated directly.
double lmi_margin(const SystemData& sys, const IqcSet& iqcs, double rho, const Matrix& P,
                  const std::vector<double>& lambdas, const Matrix& offset = Matrix());

}  // namespace iqcrad
