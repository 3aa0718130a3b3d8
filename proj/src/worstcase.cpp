#include "iqcrad/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "iqcrad/linalg.hpp"
#include "iqcrad/lyapunov_sdp.hpp"

namespace iqcrad {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Vectorized upper triangle of a symmetric matrix.
Vector upper(const Matrix& M) {
  const auto n = M.rows();
  Vector out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r; c < n; ++c) out(k++) = M(r, c);
  }
  return out;
}

Matrix sym_basis(int d, int k) {
  sdp::SymmetricVar var{0, d};
  return var.basis(k);
}

// Project Q onto {L^*(V S V^T) = 0, tr S = 1} for V spanning the leading
// eigenvectors, dropping the weakest direction while that set is empty or
// leaves the cone.
std::optional<Matrix> polish_on_face(const Matrix& Q, const SystemData& sys,
                                     const IqcSet& iqcs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(Q));
  const Eigen::Index dim = Q.rows();
  const double top = es.eigenvalues()(dim - 1);
  if (!(top > 0.0)) return std::nullopt;
  int d0 = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (es.eigenvalues()(i) > 1e-7 * top) ++d0;
  }
  for (int d = d0; d >= 1; --d) {
    const Matrix V = es.eigenvectors().rightCols(d);
    const int slots = d * (d + 1) / 2;
    const int n = sys.n();
    const int rows = n * (n + 1) / 2 + 1;
    Matrix E(rows, slots);
    for (int k = 0; k < slots; ++k) {
      const Matrix B = sym_basis(d, k);
      E.col(k).head(rows - 1) = upper(lyapunov_adjoint(V * B * V.transpose(), sys));
      E(rows - 1, k) = B.trace();
    }
    Vector f = Vector::Zero(rows);
    f(rows - 1) = 1.0;
    const Matrix S0 = V.transpose() * Q * V;
    Vector s0(slots);
    {
      sdp::SymmetricVar var{0, d};
      for (int r = 0; r < d; ++r) {
        for (int c = r; c < d; ++c) s0(var.slot(r, c)) = S0(r, c);
      }
    }
    const Vector s = s0 - linalg::pseudo_inverse(E, 1e-12) * (E * s0 - f);
    if ((E * s - f).norm() > 1e-10 * (1.0 + E.norm())) continue;
    Matrix S = Matrix::Zero(d, d);
    for (int k = 0; k < slots; ++k) S += s(k) * sym_basis(d, k);
    if (linalg::min_eigenvalue(S) < -1e-10) continue;
    const Matrix Qp = linalg::symmetrize(V * S * V.transpose());
    bool ok = true;
    for (const auto& M : iqcs) {
      if (inner(Qp, M) < -1e-8 * (1.0 + M.norm())) ok = false;
    }
    if (ok) return Qp;
  }
  return std::nullopt;
}

// Gauss-Newton on Z = [X; U] for L^*(Z Z^T) = 0, tr(Z Z^T) = 1 and
// tr(Z^T M_i Z) = 0 for the IQCs that are active at Q. Tightens the interior
// point solution so that errors do not accumulate along long trajectories.
Matrix refine_witness(const Matrix& Q, const SystemData& sys, const IqcSet& iqcs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(Q));
  const Eigen::Index dim = Q.rows();
  const double top = es.eigenvalues()(dim - 1);
  if (!(top > 0.0)) return Q;
  int d = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (es.eigenvalues()(i) > 1e-7 * top) ++d;
  }
  Matrix Z = es.eigenvectors().rightCols(d) *
             es.eigenvalues().tail(d).cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::vector<Matrix> active;
  for (const auto& M : iqcs) {
    const double nrm = M.norm();
    if (nrm > 0.0 && inner(Q, M) <= 1e-6 * nrm) active.push_back(M / nrm);
  }
  const int n = sys.n();
  const Eigen::Index rows = n * (n + 1) / 2 + 1 + static_cast<Eigen::Index>(active.size());
  auto residual = [&](const Matrix& Zc) {
    const Matrix Qc = Zc * Zc.transpose();
    Vector r(rows);
    r.head(n * (n + 1) / 2) = upper(lyapunov_adjoint(Qc, sys));
    r(n * (n + 1) / 2) = Qc.trace() - 1.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      r(n * (n + 1) / 2 + 1 + static_cast<Eigen::Index>(i)) = inner(Qc, active[i]);
    }
    return r;
  };
  Vector r = residual(Z);
  for (int it = 0; it < 30 && r.norm() > 1e-15; ++it) {
    Matrix J(rows, dim * d);
    for (Eigen::Index k = 0; k < dim * d; ++k) {
      Matrix E = Matrix::Zero(dim, d);
      E(k % dim, k / dim) = 1.0;
      const Matrix dQ = E * Z.transpose() + Z * E.transpose();
      J.col(k).head(n * (n + 1) / 2) = upper(lyapunov_adjoint(dQ, sys));
      J(n * (n + 1) / 2, k) = dQ.trace();
      for (std::size_t i = 0; i < active.size(); ++i) {
        J(n * (n + 1) / 2 + 1 + static_cast<Eigen::Index>(i), k) = inner(dQ, active[i]);
      }
    }
    const Vector step = linalg::pseudo_inverse(J, 1e-12) * r;
    const Matrix Zn = Z - Eigen::Map<const Matrix>(step.data(), dim, d);
    const Vector rn = residual(Zn);
    if (rn.norm() >= r.norm()) break;
    Z = Zn;
    r = rn;
  }
  return linalg::symmetrize(Z * Z.transpose());
}

double circular_mean(const std::vector<double>& angles) {
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  double m = std::atan2(s, c);
  if (m < 0.0) m += kTwoPi;
  if (m >= kTwoPi) m -= kTwoPi;
  return m;
}

}  // namespace

std::string to_string(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::radius_precheck:
      return "radius-precheck";
    case PipelineStage::input_rank:
      return "input-rank";
    case PipelineStage::dual_extraction:
      return "dual-extraction";
    case PipelineStage::factorization:
      return "factorization";
    case PipelineStage::orthogonal_factor:
      return "orthogonal-factor";
    case PipelineStage::technical_condition:
      return "technical-condition";
    case PipelineStage::complete:
      return "complete";
  }
  return "unknown";
}

DualWitness extract_dual_witness(const SystemData& sys, const IqcSet& iqcs,
                                 const sdp::SolverConfig& config) {
  DualWitness out;
  const MarginDual dual = solve_margin_dual(sys, iqcs, 1.0, config);
  out.d_star = dual.d_star;
  if (dual.status == sdp::SolveStatus::infeasible) {
    out.status = DualWitness::Status::infeasible;
    out.diagnostic = "dual problem infeasible: no worst-case witness exists";
    return out;
  }
  // A non-optimal status is acceptable when the returned point itself passes
  // validation: at rho = 1 the primal optimum is often not attained, which
  // stalls the multipliers but not the witness.
  if (dual.raw.y.size() == 0 || !dual.Q.allFinite()) {
    out.diagnostic = "dual solve ended with " + sdp::to_string(dual.status);
    return out;
  }
  if (std::abs(dual.d_star) > 1e-6) {
    std::ostringstream os;
    os << "dual optimum " << dual.d_star << " is not zero; rho is not 1";
    out.diagnostic = os.str();
    return out;
  }
  out.Q = linalg::symmetrize(dual.Q);
  if (auto polished = polish_on_face(out.Q, sys, iqcs)) out.Q = *polished;
  out.Q = refine_witness(out.Q, sys, iqcs);

  std::ostringstream why;
  if (linalg::min_eigenvalue(out.Q) < -1e-8) why << "Q not PSD; ";
  if (std::abs(out.Q.trace() - 1.0) > 1e-8) why << "trace(Q) != 1; ";
  if (linalg::spectral_norm(lyapunov_adjoint(out.Q, sys)) > 1e-6) why << "L*(Q) != 0; ";
  for (int i = 0; i < iqcs.size(); ++i) {
    if (inner(out.Q, iqcs[i]) < -1e-6 * (1.0 + iqcs[i].norm())) {
      why << "tr(Q M_" << i << ") < 0; ";
    }
  }
  if (!why.str().empty()) {
    out.diagnostic = "dual point (" + sdp::to_string(dual.status) + ") is not a witness: " +
                     why.str();
    return out;
  }
  out.status = DualWitness::Status::found;
  return out;
}

RankFactor rank_factor(const Matrix& Q, int n, double rank_tol) {
  if (Q.rows() != Q.cols() || Q.rows() < n) {
    throw DimensionError("Q must be square with at least " + std::to_string(n) + " rows");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(Q));
  const Eigen::Index dim = Q.rows();
  const double top = es.eigenvalues()(dim - 1);
  if (!(top > 0.0)) throw std::invalid_argument("Q is numerically zero");
  RankFactor out;
  for (Eigen::Index i = dim - 1; i >= 0; --i) {
    if (es.eigenvalues()(i) > rank_tol * top) ++out.d;
  }
  Matrix Z(dim, out.d);
  for (int k = 0; k < out.d; ++k) {
    const Eigen::Index i = dim - 1 - k;
    Vector col = es.eigenvectors().col(i) * std::sqrt(es.eigenvalues()(i));
    Eigen::Index big = 0;
    col.cwiseAbs().maxCoeff(&big);
    if (col(big) < 0.0) col = -col;
    Z.col(k) = col;
  }
  out.X = Z.topRows(n);
  out.U = Z.bottomRows(dim - n);
  return out;
}

Matrix recover_orthogonal_factor(const Matrix& X, const Matrix& G) {
  if (X.rows() != G.rows() || X.cols() != G.cols()) {
    throw DimensionError("X and G must have the same shape");
  }
  const auto d = X.cols();
  if (d == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(X.transpose() * G, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(sv(0), 1e-300);
  Eigen::Index r = 0;
  while (r < d && sv(r) > cutoff) ++r;
  const Matrix& Us = svd.matrixU();
  const Matrix& Vs = svd.matrixV();
  Matrix F = Us.leftCols(r) * Vs.leftCols(r).transpose();
  if (r < d) {
    const Matrix U0 = Us.rightCols(d - r);
    const Matrix V0 = Vs.rightCols(d - r);
    F += U0 * linalg::polar_factor(U0.transpose() * V0) * V0.transpose();
  }
  return F;
}

EigenGrouping eigen_group(const Matrix& F, double angle_tol) {
  const auto d = F.rows();
  EigenGrouping out;
  if (d == 0) return out;
  Eigen::RealSchur<Matrix> schur(F);
  const Matrix& T = schur.matrixT();
  const Matrix& Z = schur.matrixU();

  struct Entry {
    double theta;
    Eigen::VectorXcd w;
  };
  std::vector<Entry> entries;
  for (Eigen::Index i = 0; i < d;) {
    if (i + 1 < d && T(i + 1, i) != 0.0) {
      Eigen::ComplexEigenSolver<CMatrix> ces(T.block(i, i, 2, 2).cast<std::complex<double>>());
      const Eigen::Index k = ces.eigenvalues()(0).imag() > 0.0 ? 0 : 1;
      const std::complex<double> lam = ces.eigenvalues()(k);
      Eigen::VectorXcd w = Z.middleCols(i, 2).cast<std::complex<double>>() * ces.eigenvectors().col(k);
      w.normalize();
      const double theta = std::atan2(lam.imag(), lam.real());
      entries.push_back({theta, w});
      entries.push_back({kTwoPi - theta, w.conjugate()});
      i += 2;
    } else {
      const double theta = T(i, i) >= 0.0 ? 0.0 : std::numbers::pi;
      entries.push_back({theta, Z.col(i).cast<std::complex<double>>()});
      i += 1;
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.theta < b.theta; });

  // Split at gaps larger than angle_tol, then join across 2*pi.
  std::vector<std::vector<std::size_t>> clusters{{0}};
  auto note_gap = [&](double gap) {
    if (gap > angle_tol && gap <= 10.0 * angle_tol) {
      std::ostringstream os;
      os << "eigenvalue angle gap " << gap << " is close to the clustering tolerance";
      out.warnings.push_back(os.str());
    }
  };
  for (std::size_t k = 1; k < entries.size(); ++k) {
    const double gap = entries[k].theta - entries[k - 1].theta;
    note_gap(gap);
    if (gap > angle_tol) clusters.emplace_back();
    clusters.back().push_back(k);
  }
  std::vector<bool> shifted(entries.size(), false);
  if (clusters.size() > 1) {
    const double wrap = entries.front().theta + kTwoPi - entries.back().theta;
    note_gap(wrap);
    if (wrap <= angle_tol) {
      for (std::size_t k : clusters.back()) shifted[k] = true;
      clusters.front().insert(clusters.front().begin(), clusters.back().begin(),
                              clusters.back().end());
      clusters.pop_back();
    }
  }

  for (const auto& members : clusters) {
    EigenGroup g;
    std::vector<double> angles;
    g.W.resize(d, static_cast<Eigen::Index>(members.size()));
    for (std::size_t c = 0; c < members.size(); ++c) {
      angles.push_back(entries[members[c]].theta - (shifted[members[c]] ? kTwoPi : 0.0));
      g.W.col(static_cast<Eigen::Index>(c)) = entries[members[c]].w;
    }
    g.theta = circular_mean(angles);
    if (g.theta > kTwoPi - angle_tol) g.theta = 0.0;
    if (g.W.cols() > 1) {
      const CMatrix gram = g.W.adjoint() * g.W;
      if ((gram - CMatrix::Identity(g.W.cols(), g.W.cols())).norm() > 1e-10) {
        Eigen::HouseholderQR<CMatrix> qr(g.W);
        g.W = qr.householderQ() * CMatrix::Identity(d, g.W.cols());
      }
    }
    out.groups.push_back(std::move(g));
  }
  std::stable_sort(out.groups.begin(), out.groups.end(),
                   [](const EigenGroup& a, const EigenGroup& b) { return a.theta < b.theta; });
  return out;
}

Matrix averaged_form(const std::vector<EigenGroup>& groups, const Matrix& H) {
  const auto d = H.rows();
  CMatrix acc = CMatrix::Zero(d, d);
  const CMatrix Hc = H.cast<std::complex<double>>();
  for (const auto& g : groups) {
    const CMatrix P = g.W * g.W.adjoint();
    acc += P * Hc * P;
  }
  return linalg::symmetrize(acc.real());
}

TechnicalConditionResult technical_condition(const WorstCaseModes& modes, const IqcSet& iqcs,
                                             const sdp::SolverConfig& config) {
  TechnicalConditionResult out;
  const int d = modes.d;
  if (static_cast<int>(modes.H.size()) != iqcs.size()) {
    throw DimensionError("modes carry " + std::to_string(modes.H.size()) + " IQC forms, expected " +
                         std::to_string(iqcs.size()));
  }
  std::vector<Matrix> G;
  for (const auto& H : modes.H) G.push_back(averaged_form(modes.groups, H));

  auto accept = [&](const Vector& v) {
    if ((modes.X * v).norm() < 1e-8) return false;
    for (std::size_t i = 0; i < G.size(); ++i) {
      if (v.dot(G[i] * v) < -1e-8 * (1.0 + modes.H[i].norm())) return false;
    }
    return true;
  };
  std::vector<std::string> notes;

  if (d == 1) {
    const Vector v = Vector::Ones(1);
    if (accept(v)) {
      out.v = v;
      out.method = "single-mode";
      return out;
    }
    notes.push_back("v = 1 violates the condition");
  }

  const bool distinct = std::all_of(modes.groups.begin(), modes.groups.end(),
                                    [](const EigenGroup& g) { return g.multiplicity() == 1; });
  if (distinct && d > 1) {
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(d);
    for (const auto& g : modes.groups) sum += g.W.col(0);
    if (sum.imag().norm() <= 1e-10) {
      const Vector v = sum.real();
      if (accept(v)) {
        out.v = v;
        out.method = "distinct-eigenvalues";
        return out;
      }
      notes.push_back("sum of eigenvectors violates the condition");
    } else {
      notes.push_back("sum of eigenvectors is not real");
    }
  }

  // Trace (nuclear norm) minimization over V >= 0 with tr(V X^T X) = 1.
  sdp::SdpProblem prob;
  const auto V = prob.add_symmetric(d);
  const sdp::MatrixExpr Ve = sdp::MatrixExpr::of(V);
  prob.add_psd(Ve);
  prob.add_equality(sdp::inner(modes.X.transpose() * modes.X, Ve) - sdp::LinearExpr(1.0));
  for (const auto& Gi : G) {
    const double nrm = Gi.norm();
    if (nrm > 0.0) prob.add_nonnegative(sdp::inner(Gi / nrm, Ve));
  }
  prob.minimize(sdp::trace(Ve));
  const sdp::SdpSolution sol = sdp::solve(prob, config);
  if (sol.status != sdp::SolveStatus::optimal) {
    notes.push_back("relaxation " + sdp::to_string(sol.status));
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sol.value(V));
    const double top = es.eigenvalues()(d - 1);
    const double tr = es.eigenvalues().sum();
    if (top >= (1.0 - 1e-6) * tr && top > 0.0) {
      Vector v = es.eigenvectors().col(d - 1) * std::sqrt(top);
      Eigen::Index big = 0;
      v.cwiseAbs().maxCoeff(&big);
      if (v(big) < 0.0) v = -v;
      if (accept(v)) {
        out.v = v;
        out.method = "relaxation";
        return out;
      }
      notes.push_back("rank-one relaxation solution fails re-verification");
    } else {
      std::ostringstream os;
      os << "relaxation solution is not rank one (top eigenvalue carries " << top / tr
         << " of the trace)";
      notes.push_back(os.str());
    }
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < notes.size(); ++i) os << (i ? "; " : "") << notes[i];
  out.diagnostic = os.str();
  return out;
}

Trajectory build_trajectory(const WorstCaseModes& modes, int horizon) {
  if (!modes.v) throw std::invalid_argument("build_trajectory needs v");
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  Trajectory traj;
  traj.provenance = Provenance::mode_generated;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(horizon));
  Vector z = *modes.v;
  for (int k = 0; k < horizon; ++k) {
    traj.states.push_back(modes.X * z);
    traj.inputs.push_back(modes.U * z);
    z = modes.F * z;
  }
  traj.states.push_back(modes.X * z);
  return traj;
}

std::vector<double> iqc_sum_lower_bound(const WorstCaseModes& modes) {
  if (!modes.v) throw std::invalid_argument("iqc_sum_lower_bound needs v");
  const Eigen::VectorXcd v = modes.v->cast<std::complex<double>>();
  std::vector<Eigen::VectorXcd> proj;
  for (const auto& g : modes.groups) proj.push_back(g.W * (g.W.adjoint() * v));
  std::vector<double> out;
  for (const auto& H : modes.H) {
    const CMatrix Hc = H.cast<std::complex<double>>();
    double beta = 0.0;
    for (std::size_t j = 0; j < proj.size(); ++j) {
      // v^T P_j = (P_j v)^* for Hermitian P_j and real v.
      const Eigen::RowVectorXcd left = proj[j].adjoint() * Hc;
      for (std::size_t l = 0; l < proj.size(); ++l) {
        if (l == j) continue;
        const std::complex<double> c = left * proj[l];
        const double dtheta = modes.groups[l].theta - modes.groups[j].theta;
        const double denom = std::abs(1.0 - std::polar(1.0, dtheta));
        beta -= std::abs(c) * 2.0 / denom;
      }
    }
    out.push_back(beta);
  }
  return out;
}

std::optional<Matrix> feedback_gain(const WorstCaseModes& modes, double rank_tol) {
  const auto n = modes.X.rows();
  const auto d = modes.X.cols();
  if (d == 0 || d > n) return std::nullopt;
  Eigen::JacobiSVD<Matrix> svd(modes.X);
  const Vector& sv = svd.singularValues();
  if (!(sv(d - 1) > rank_tol * sv(0))) return std::nullopt;
  return Matrix(modes.U * linalg::pseudo_inverse(modes.X, 1e-14));
}

HardShift hard_iqc_shift(const WorstCaseModes& modes, const IqcSet& iqcs, int window) {
  HardShift out;
  if (iqcs.size() != 1) {
    out.diagnostic = "hard IQC shift needs exactly one IQC";
    return out;
  }
  if (!modes.v) throw std::invalid_argument("hard_iqc_shift needs v");
  if (window < 10) throw std::invalid_argument("window too short");
  const Matrix& H = modes.H.at(0);
  std::vector<double> S(static_cast<std::size_t>(window));
  Vector z = *modes.v;
  double acc = 0.0, scale = 0.0;
  for (int k = 0; k < window; ++k) {
    acc += z.dot(H * z);
    S[static_cast<std::size_t>(k)] = acc;
    scale = std::max(scale, std::abs(acc));
    z = modes.F * z;
  }
  const double mn = *std::min_element(S.begin(), S.end());
  int nstar = 0;
  while (S[static_cast<std::size_t>(nstar)] > mn + 1e-12 * (1.0 + scale)) ++nstar;
  nstar += 1;  // S index k holds the sum with N = k + 1 terms
  const int tail = window / 10;
  if (nstar > window - tail) {
    out.diagnostic = "minimum partial sum at N=" + std::to_string(nstar) +
                     " lies in the last tenth of the window; argmin not certified";
    return out;
  }
  out.shift = nstar;
  return out;
}

bool pointwise_check(const WorstCaseModes& modes, const IqcSet& iqcs, int steps) {
  if (modes.d != 1 || !modes.v) return false;
  (void)iqcs;
  Vector z = *modes.v;
  for (int k = 0; k < steps; ++k) {
    for (const auto& H : modes.H) {
      if (z.dot(H * z) < -1e-9 * (1.0 + H.norm() * z.squaredNorm())) return false;
    }
    z = modes.F * z;
  }
  return true;
}

WorstCaseOutcome worst_case(const SystemData& sys, const IqcSet& iqcs,
                            const WorstCaseOptions& opts) {
  iqcs.check_compatible(sys);
  WorstCaseOutcome out;
  const int n = sys.n();
  const int m = sys.m();

  if (!opts.skip_precheck) {
    out.radius = spectral_radius(sys, iqcs, opts.radius);
    const double rho = out.radius->rho;
    // The bisection reports the feasible end of its bracket, which can sit up
    // to one tolerance above the true value.
    if (!std::isfinite(rho) || std::abs(rho - 1.0) > 2.0 * opts.radius.bisect_tol) {
      std::ostringstream os;
      os << "rho = " << rho << " is not 1; the witness construction needs rho = 1";
      out.stage = PipelineStage::radius_precheck;
      out.reason = os.str();
      return out;
    }
  }

  if (m > 0) {
    Eigen::JacobiSVD<Matrix> svd(sys.B());
    const Vector& sv = svd.singularValues();
    if (m > n || sv(sv.size() - 1) <= 1e-10 * sv(0)) {
      out.stage = PipelineStage::input_rank;
      out.reason = "B does not have full column rank";
      return out;
    }
  }

  const DualWitness dual = extract_dual_witness(sys, iqcs, opts.radius.solver);
  if (dual.status != DualWitness::Status::found) {
    out.stage = PipelineStage::dual_extraction;
    out.reason = dual.diagnostic;
    return out;
  }

  WorstCaseModes modes;
  modes.Q = dual.Q;
  const RankFactor rf = rank_factor(modes.Q, n, opts.rank_tol);
  modes.d = rf.d;
  modes.X = rf.X;
  modes.U = rf.U;
  if (modes.X.norm() <= 1e-8) {
    out.stage = PipelineStage::factorization;
    out.reason = "state part X of the dual witness is zero";
    return out;
  }

  const Matrix G = sys.A() * modes.X + sys.B() * modes.U;
  modes.F = recover_orthogonal_factor(modes.X, G);
  const double fit = (modes.X * modes.F - G).norm();
  if (fit > 1e-4) {
    std::ostringstream os;
    os << "dual witness inconsistent: ||X F - (A X + B U)|| = " << fit;
    out.stage = PipelineStage::orthogonal_factor;
    out.reason = os.str();
    return out;
  }

  EigenGrouping grouping = eigen_group(modes.F, opts.angle_tol);
  modes.groups = std::move(grouping.groups);
  modes.warnings = std::move(grouping.warnings);
  Matrix XU(n + m, modes.d);
  XU << modes.X, modes.U;
  for (const auto& M : iqcs) modes.H.push_back(linalg::symmetrize(XU.transpose() * M * XU));

  const TechnicalConditionResult tc = technical_condition(modes, iqcs, opts.radius.solver);
  if (!tc.v) {
    out.stage = PipelineStage::technical_condition;
    out.reason = "technical condition not established: " + tc.diagnostic;
    return out;
  }
  modes.v = tc.v;

  WitnessReport report;
  report.trajectory = build_trajectory(modes, opts.horizon);
  report.beta = iqc_sum_lower_bound(modes);
  report.K = feedback_gain(modes, opts.x_rank_tol);
  if (iqcs.size() == 1) {
    const HardShift hs = hard_iqc_shift(modes, iqcs, opts.hard_window);
    report.hard_shift = hs.shift;
    if (!hs.shift) modes.warnings.push_back(hs.diagnostic);
  }
  report.pointwise = pointwise_check(modes, iqcs);
  report.modes = std::move(modes);
  out.report = std::move(report);
  out.stage = PipelineStage::complete;
  return out;
}

}  // namespace iqcrad
