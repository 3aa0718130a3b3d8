#include "iqcrad/radius.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iqcrad/linalg.hpp"

namespace iqcrad {
namespace {

using sdp::LinearExpr;
using sdp::MatrixExpr;

// Working coordinates x = T x', with IQC i scaled by weight[i] (empty means
// unit-norm scaling).
struct Frame {
  Matrix T;
  Matrix Tinv;
  std::vector<double> weight;
};

struct Probe {
  bool feasible = false;
  double margin = 0.0;
  Matrix P;  // in original coordinates, not normalized
  std::vector<double> lambdas;
  Matrix P_frame;
  std::string diagnostic;
};

Matrix embed_state_transform(const Matrix& T, int m) {
  const auto n = T.rows();
  Matrix E = Matrix::Zero(n + m, n + m);
  E.topLeftCorner(n, n) = T;
  if (m > 0) E.bottomRightCorner(m, m) = Matrix::Identity(m, m);
  return E;
}

Probe probe(const SystemData& sys, const IqcSet& iqcs, const Frame& frame, double rho,
            const RadiusOptions& opts) {
  const int n = sys.n();
  const int m = sys.m();
  // Divide out rho only when it is large, so that neither the rho^2 P term nor
  // A^T P A swamps the IQC multipliers under the budget.
  const double s = std::max(1.0, rho);
  const SystemData scaled(frame.Tinv * sys.A() * frame.T / s, frame.Tinv * sys.B() / s);
  const Matrix E = embed_state_transform(frame.T, m);
  IqcSet moved;
  for (int i = 0; i < iqcs.size(); ++i) {
    const double w = frame.weight.empty() ? 1.0 : frame.weight[static_cast<std::size_t>(i)];
    moved.add(w * (E.transpose() * iqcs[i] * E));
  }

  MarginOptions mo;
  mo.budget = opts.probe_budget * (n + iqcs.size());
  mo.normalize_iqcs = frame.weight.empty();
  const MarginPrimal res = solve_margin_primal(scaled, moved, rho / s, opts.solver, mo);

  Probe out;
  if (!res.raw.y.allFinite() || res.raw.y.size() == 0) {
    out.diagnostic = "solver returned no point at rho=" + std::to_string(rho) + " (" +
                     sdp::to_string(res.status) + ")";
    return out;
  }
  out.P_frame = res.P;
  out.lambdas = res.lambdas;
  // Feasibility is decided by the returned point itself, not the solver status.
  out.margin = lmi_margin(scaled, moved, rho / s, res.P, res.lambdas);
  const double pmin = linalg::min_eigenvalue(res.P);
  // Margins shrink like rho^2 for small rho, so the threshold does too.
  const double r = rho / s;
  out.feasible = out.margin < -opts.strict_eps * std::min(1.0, r * r) && pmin > 0.0;
  if (!out.feasible && res.status != sdp::SolveStatus::optimal) {
    out.diagnostic = "solver status " + sdp::to_string(res.status) + " at rho=" +
                     std::to_string(rho);
  }
  out.P = linalg::symmetrize(frame.Tinv.transpose() * res.P * frame.Tinv);
  for (int i = 0; i < iqcs.size(); ++i) {
    const double w = frame.weight.empty() ? 1.0 : frame.weight[static_cast<std::size_t>(i)];
    out.lambdas[static_cast<std::size_t>(i)] *= w * s * s;
  }
  return out;
}

// Coordinates in which the latest certificate becomes P = I with unit
// multipliers. Rebuilt from scratch each time; composing successive transforms
// compounds the conditioning of the budget-optimal P.
void adapt(Frame& frame, const Matrix& P, const std::vector<double>& lambdas,
           const IqcSet& iqcs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(P));
  const Vector ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) return;
  const double lmin = ev(0);
  const Matrix& V = es.eigenvectors();
  const Matrix S = V * (ev.cwiseSqrt().cwiseInverse() * std::sqrt(lmin)).asDiagonal() * V.transpose();
  const Matrix Sinv = V * (ev.cwiseSqrt() / std::sqrt(lmin)).asDiagonal() * V.transpose();
  frame.T = S;
  frame.Tinv = Sinv;
  const int n = static_cast<int>(P.rows());
  const Matrix E = embed_state_transform(S, static_cast<int>(iqcs.empty() ? n : iqcs[0].rows()) - n);
  frame.weight.assign(lambdas.size(), 1.0);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double nrm = (E.transpose() * iqcs[static_cast<int>(i)] * E).norm();
    const double unit = nrm > 0.0 ? 1.0 / nrm : 1.0;
    // Multipliers that were (near) zero keep unit-norm scaling.
    frame.weight[i] = std::max(lambdas[i] / lmin, 1e-3 * unit);
  }
}

void normalize_certificate(Matrix& P, std::vector<double>& lambdas) {
  const double pmin = linalg::min_eigenvalue(P);
  if (pmin > 0.0) {
    P /= pmin;
    for (auto& l : lambdas) l /= pmin;
  }
}

// A probe in the original coordinates, falling back to the adapted frame. The
// original frame suits well-conditioned problems; the adapted one is what
// makes nearly defective ones (Jordan-like blocks) resolvable.
Probe probe_both(const SystemData& sys, const IqcSet& iqcs, const Frame& frame, double rho,
                 const RadiusOptions& opts) {
  const int n = sys.n();
  const Frame identity{Matrix::Identity(n, n), Matrix::Identity(n, n)};
  Probe p = probe(sys, iqcs, identity, rho, opts);
  if (p.feasible) return p;
  Probe q = probe(sys, iqcs, frame, rho, opts);
  if (q.feasible) return q;
  if (p.diagnostic.empty()) p.diagnostic = q.diagnostic;
  return p;
}

}  // namespace

RadiusCertificate spectral_radius(const SystemData& sys, const IqcSet& iqcs,
                                  const RadiusOptions& opts) {
  iqcs.check_compatible(sys);
  if (!(opts.bisect_tol > 0.0) || !(opts.rho_max > 0.0) || !(opts.strict_eps >= 0.0)) {
    throw std::invalid_argument("radius options must be positive");
  }
  const int n = sys.n();
  RadiusCertificate cert;
  Frame frame{Matrix::Identity(n, n), Matrix::Identity(n, n)};

  auto record = [&](const Probe& p, double rho) {
    cert.P = p.P;
    cert.lambdas = p.lambdas;
    cert.rho_hi = rho;
    adapt(frame, p.P, p.lambdas, iqcs);
  };

  double hi = std::min(std::max(1.0, linalg::spectral_radius(sys.A())), opts.rho_max);
  bool found = false;
  while (true) {
    const Probe p = probe_both(sys, iqcs, frame, hi, opts);
    ++cert.probes;
    if (!p.diagnostic.empty()) cert.diagnostics.push_back(p.diagnostic);
    if (p.feasible) {
      record(p, hi);
      found = true;
      break;
    }
    if (hi >= opts.rho_max) break;
    cert.rho_lo = hi;
    hi = std::min(2.0 * hi, opts.rho_max);
  }
  if (!found) {
    cert.rho = std::numeric_limits<double>::infinity();
    cert.rho_lo = opts.rho_max;
    cert.rho_hi = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "LMI infeasible at rho_max=" << opts.rho_max << "; no certificate";
    cert.diagnostics.push_back(os.str());
    return cert;
  }

  double lo = std::max(cert.rho_lo, opts.bisect_tol);
  const bool lo_probed = cert.rho_lo > 0.0;
  bool lo_checked = lo_probed;
  while (cert.rho_hi - lo > opts.bisect_tol) {
    const double mid = 0.5 * (lo + cert.rho_hi);
    const Probe p = probe_both(sys, iqcs, frame, mid, opts);
    ++cert.probes;
    if (!p.diagnostic.empty()) cert.diagnostics.push_back(p.diagnostic);
    if (p.feasible) {
      record(p, mid);
    } else {
      lo = mid;
      lo_checked = true;
    }
  }
  if (!lo_checked) {
    // The lower end was assumed infeasible; confirm it.
    const Probe p = probe_both(sys, iqcs, frame, lo, opts);
    ++cert.probes;
    if (p.feasible) {
      record(p, lo);
      cert.diagnostics.push_back("LMI feasible at the lowest probed rho=" + std::to_string(lo));
    }
  }
  cert.rho_lo = std::min(lo, cert.rho_hi);
  cert.rho = cert.rho_hi;
  normalize_certificate(cert.P, cert.lambdas);
  cert.margin = lmi_margin(sys, iqcs, cert.rho_hi, cert.P, cert.lambdas);

  const AttainmentResult att = attainment_check(sys, iqcs, cert.rho, opts);
  cert.attained = att.attained;
  cert.attainment_margin = att.margin;
  if (!att.diagnostic.empty()) cert.diagnostics.push_back(att.diagnostic);
  return cert;
}

AttainmentResult attainment_check(const SystemData& sys, const IqcSet& iqcs, double rho,
                                  const RadiusOptions& opts) {
  if (!std::isfinite(rho) || !(rho > 0.0)) {
    throw std::invalid_argument("attainment check needs a finite positive rho");
  }
  AttainmentResult out;
  MarginOptions mo;
  mo.budget = opts.attain_budget * (sys.n() + iqcs.size());
  const MarginPrimal res = solve_margin_primal(sys, iqcs, rho, opts.solver, mo);
  if (res.status != sdp::SolveStatus::optimal) {
    out.diagnostic = "attainment probe ended with " + sdp::to_string(res.status);
    out.conclusive = false;
    if (res.raw.y.size() == 0 || !res.raw.y.allFinite()) return out;
    // A usable point still proves attainment; only an optimum can refute it.
    const bool usable = linalg::min_eigenvalue(res.P) > 0.0 &&
                        std::all_of(res.lambdas.begin(), res.lambdas.end(),
                                    [](double l) { return l >= 0.0; });
    out.margin = usable ? lmi_margin(sys, iqcs, rho, res.P, res.lambdas) : res.s_star;
    if (usable && out.margin <= opts.strict_eps) {
      out.conclusive = true;
      out.attained = true;
      out.P = res.P;
      out.lambdas = res.lambdas;
    }
    return out;
  }
  out.margin = res.s_star;
  out.P = res.P;
  out.lambdas = res.lambdas;
  out.attained = res.s_star <= opts.strict_eps;
  return out;
}

RateCertificate exponential_rate_certificate(const SystemData& sys, const IqcSet& iqcs,
                                             const RadiusOptions& opts) {
  RateCertificate out;
  out.certificate = spectral_radius(sys, iqcs, opts);
  out.rho = out.certificate.rho;
  if (!out.certificate.finite()) {
    out.reason = "no feasible rho up to rho_max";
    return out;
  }
  if (!out.certificate.attained) {
    out.reason = "optimum not attained at rho";
    return out;
  }
  const double rho = out.rho;
  const SystemData scaled(sys.A() / rho, sys.B() / rho);
  const AttainmentResult res = attainment_check(scaled, iqcs, 1.0, opts);
  if (!res.attained) {
    out.reason = "scaled pair not certified at radius 1" +
                 (res.diagnostic.empty() ? std::string() : " (" + res.diagnostic + ")");
    return out;
  }
  out.certificate.P = res.P;
  out.certificate.lambdas = res.lambdas;
  normalize_certificate(out.certificate.P, out.certificate.lambdas);
  out.certificate.margin = lmi_margin(scaled, iqcs, 1.0, out.certificate.P,
                                      out.certificate.lambdas);
  out.valid = true;
  return out;
}

StrengthenedCertificate strengthened_certificate(const SystemData& sys, const IqcSet& iqcs,
                                                 double rho, const RadiusOptions& opts) {
  iqcs.check_compatible(sys);
  const int n = sys.n();
  const int dim = n + sys.m();
  Matrix offset = Matrix::Zero(dim, dim);
  offset.topLeftCorner(n, n) = Matrix::Identity(n, n);

  // Minimize the size of (P, lambda) subject to the strengthened LMI with a
  // little extra room, so that solver tolerance cannot eat the strict part.
  sdp::SdpProblem prob;
  const auto P = prob.add_symmetric(n);
  std::vector<sdp::ScalarVar> lam;
  std::vector<double> norms;
  for (const auto& M : iqcs) {
    lam.push_back(prob.add_scalar());
    norms.push_back(M.norm());
  }
  MatrixExpr lmi = MatrixExpr::linear_map(P, dim, [&](const Matrix& E) {
    return lyapunov_operator(E, sys, rho);
  });
  for (int i = 0; i < iqcs.size(); ++i) {
    if (norms[static_cast<std::size_t>(i)] > 0.0) {
      lmi += MatrixExpr::scaled(lam[static_cast<std::size_t>(i)],
                                iqcs[i] / norms[static_cast<std::size_t>(i)]);
    }
  }
  const double extra = 1e-6;
  lmi += MatrixExpr::constant(offset * (1.0 + extra) + extra * Matrix::Identity(dim, dim));
  prob.add_psd(-1.0 * lmi);
  prob.add_psd(MatrixExpr::of(P));
  LinearExpr size = trace(MatrixExpr::of(P));
  for (const auto& l : lam) {
    prob.add_nonnegative(LinearExpr(l));
    size += LinearExpr(l);
  }
  prob.minimize(size);

  StrengthenedCertificate out;
  const sdp::SdpSolution sol = sdp::solve(prob, opts.solver);
  if (sol.y.size() == 0 || !sol.y.allFinite()) {
    out.diagnostic = "solver returned no point (" + sdp::to_string(sol.status) + ")";
    return out;
  }
  out.P = sol.value(P);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const double l = std::max(0.0, sol.value(lam[i]));
    out.lambdas.push_back(norms[i] > 0.0 ? l / norms[i] : 0.0);
  }
  out.margin = lmi_margin(sys, iqcs, rho, out.P, out.lambdas, offset);
  out.found = out.margin <= 0.0 && linalg::min_eigenvalue(out.P) >= 0.0;
  if (!out.found) {
    out.diagnostic = "strengthened LMI not satisfied (" + sdp::to_string(sol.status) + ")";
  }
  return out;
}

std::optional<DefectiveDiagnostic> defective_unit_circle_diagnostic(const SystemData& sys,
                                                                    int horizon, double tol) {
  if (sys.m() != 0) return std::nullopt;
  using CMatrix = Eigen::MatrixXcd;
  const int n = sys.n();
  Eigen::EigenSolver<Matrix> es(sys.A(), false);
  std::vector<std::complex<double>> candidates;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(std::abs(lam) - 1.0) > std::sqrt(tol)) continue;
    if (std::abs(lam.imag()) <= std::sqrt(tol)) lam = {lam.real() > 0 ? 1.0 : -1.0, 0.0};
    lam /= std::abs(lam);
    candidates.push_back(lam);
  }
  // Real eigenvalues first, then by angle, for a deterministic choice.
  std::sort(candidates.begin(), candidates.end(), [](auto a, auto b) {
    const bool ra = a.imag() == 0.0, rb = b.imag() == 0.0;
    if (ra != rb) return ra;
    return std::arg(a) < std::arg(b);
  });
  const double scale = std::max(1.0, linalg::spectral_norm(sys.A()));
  auto null_basis = [&](const CMatrix& M) {
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > tol * scale) ++rank;
    }
    return CMatrix(svd.matrixV().rightCols(n - rank));
  };
  for (const auto& lam : candidates) {
    const CMatrix N1 = sys.A().cast<std::complex<double>>() -
                       lam * CMatrix::Identity(n, n);
    const CMatrix K1 = null_basis(N1);
    const CMatrix K2 = null_basis(N1 * N1);
    if (K2.cols() <= K1.cols()) continue;
    // Component of the generalized eigenspace orthogonal to the eigenspace.
    const CMatrix proj = K2 - K1 * (K1.adjoint() * K2);
    Eigen::Index best = 0;
    proj.colwise().norm().maxCoeff(&best);
    Eigen::VectorXcd g = proj.col(best);
    Vector x0 = g.real();
    if (x0.norm() < 1e-8) x0 = g.imag();
    if (x0.norm() < 1e-8) continue;
    x0 /= x0.norm();

    DefectiveDiagnostic out;
    out.eigenvalue = lam;
    out.x0 = x0;
    out.trajectory = simulate(sys, x0, horizon);
    double sk = 0, sx = 0, skk = 0, skx = 0;
    const int N = static_cast<int>(out.trajectory.states.size());
    for (int k = 0; k < N; ++k) {
      const double x = out.trajectory.states[static_cast<std::size_t>(k)].norm();
      sk += k;
      sx += x;
      skk += double(k) * k;
      skx += k * x;
    }
    const double denom = N * skk - sk * sk;
    out.growth_slope = denom > 0 ? (N * skx - sk * sx) / denom : 0.0;
    return out;
  }
  return std::nullopt;
}

}  // namespace iqcrad
