#include "iqcrad/lyapunov_sdp.hpp"

#include <cmath>
#include <limits>

#include "iqcrad/linalg.hpp"

namespace iqcrad {

using sdp::LinearExpr;
using sdp::MatrixExpr;

MarginPrimal solve_margin_primal(const SystemData& sys, const IqcSet& iqcs, double rho,
                                 const sdp::SolverConfig& config, const MarginOptions& options,
                                 const sdp::SdpSolver& solver) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  iqcs.check_compatible(sys);
  const int n = sys.n();
  const int dim = n + sys.m();
  if (options.offset.size() != 0 && (options.offset.rows() != dim || options.offset.cols() != dim)) {
    throw DimensionError("margin offset must be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }

  sdp::SdpProblem prob;
  const auto s = prob.add_scalar();
  const auto P = prob.add_symmetric(n);
  std::vector<sdp::ScalarVar> lam;
  std::vector<double> norms;
  for (int i = 0; i < iqcs.size(); ++i) {
    lam.push_back(prob.add_scalar());
    norms.push_back(options.normalize_iqcs ? iqcs[i].norm() : 1.0);
  }

  MatrixExpr lmi = MatrixExpr::scaled(s, Matrix::Identity(dim, dim));
  lmi -= MatrixExpr::linear_map(P, dim, [&](const Matrix& E) {
    return lyapunov_operator(E, sys, rho);
  });
  for (int i = 0; i < iqcs.size(); ++i) {
    if (norms[i] == 0.0) continue;
    lmi -= MatrixExpr::scaled(lam[i], iqcs[i] / norms[i]);
  }
  if (options.offset.size() != 0) lmi -= MatrixExpr::constant(options.offset);
  prob.add_psd(lmi);
  prob.add_psd(MatrixExpr::of(P) - MatrixExpr::constant(Matrix::Identity(n, n)));
  for (const auto& l : lam) prob.add_nonnegative(LinearExpr(l));
  if (options.budget) {
    LinearExpr used = trace(MatrixExpr::of(P));
    for (const auto& l : lam) used += LinearExpr(l);
    prob.add_nonnegative(LinearExpr(*options.budget) - used);
  }
  prob.minimize(LinearExpr(s));

  MarginPrimal out;
  out.raw = solver.solve(prob, config);
  out.status = out.raw.status;
  out.s_star = out.status == sdp::SolveStatus::unbounded ? -std::numeric_limits<double>::infinity()
                                                         : out.raw.value(s);
  out.P = out.raw.value(P);
  for (int i = 0; i < iqcs.size(); ++i) {
    const double l = std::max(0.0, out.raw.value(lam[i]));
    out.lambdas.push_back(norms[i] > 0.0 ? l / norms[i] : 0.0);
  }
  return out;
}

MarginDual solve_margin_dual(const SystemData& sys, const IqcSet& iqcs, double rho,
                             const sdp::SolverConfig& config, const sdp::SdpSolver& solver) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  iqcs.check_compatible(sys);
  const int n = sys.n();
  const int dim = n + sys.m();

  sdp::SdpProblem prob;
  const auto Q = prob.add_symmetric(dim);
  const MatrixExpr Qe = MatrixExpr::of(Q);
  const MatrixExpr adj = MatrixExpr::linear_map(Q, n, [&](const Matrix& E) {
    return lyapunov_adjoint(E, sys, rho);
  });
  prob.add_psd(adj);
  prob.add_psd(Qe);
  for (const auto& M : iqcs) {
    const double nrm = M.norm();
    if (nrm == 0.0) continue;
    prob.add_nonnegative(inner(M / nrm, Qe));
  }
  prob.add_equality(trace(Qe) - LinearExpr(1.0));
  prob.maximize(trace(adj));

  MarginDual out;
  out.raw = solver.solve(prob, config);
  out.status = out.raw.status;
  out.d_star = out.raw.objective;
  out.Q = out.raw.value(Q);
  return out;
}

double lmi_margin(const SystemData& sys, const IqcSet& iqcs, double rho, const Matrix& P,
                  const std::vector<double>& lambdas, const Matrix& offset) {
  if (static_cast<int>(lambdas.size()) != iqcs.size()) {
    throw DimensionError("expected " + std::to_string(iqcs.size()) + " multipliers, got " +
                         std::to_string(lambdas.size()));
  }
  iqcs.check_compatible(sys);
  Matrix L = lyapunov_operator(P, sys, rho);
  for (int i = 0; i < iqcs.size(); ++i) L += lambdas[static_cast<std::size_t>(i)] * iqcs[i];
  if (offset.size() != 0) L += offset;
  return linalg::max_eigenvalue(L);
}

}  // namespace iqcrad
