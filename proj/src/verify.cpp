#include "iqcrad/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iqcrad/linalg.hpp"

namespace iqcrad {
namespace {

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double N = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double denom = N * sxx - sx * sx;
  return denom > 0 ? (N * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

LyapunovTrace lyapunov_trace(const Trajectory& traj, const SystemData& sys, const Matrix& P,
                             const std::vector<double>& lambdas, const IqcSet& iqcs) {
  traj.validate(sys);
  iqcs.check_compatible(sys);
  if (static_cast<int>(lambdas.size()) != iqcs.size()) {
    throw DimensionError("certificate has " + std::to_string(lambdas.size()) +
                         " multipliers for " + std::to_string(iqcs.size()) + " IQCs");
  }
  Matrix L = lyapunov_operator(P, sys);
  Matrix Msum = Matrix::Zero(L.rows(), L.cols());
  for (int i = 0; i < iqcs.size(); ++i) Msum += lambdas[static_cast<std::size_t>(i)] * iqcs[i];
  L += Msum;

  LyapunovTrace out;
  const int N = traj.steps();
  double acc = 0.0;
  for (int k = 0; k <= N; ++k) {
    const Vector& x = traj.states[static_cast<std::size_t>(k)];
    out.V.push_back(x.dot(P * x) + acc);
    if (k < N) {
      const Vector& u = traj.inputs[static_cast<std::size_t>(k)];
      acc += quadratic_form(Msum, x, u);
      out.direct.push_back(quadratic_form(L, x, u));
    }
  }
  for (int k = 0; k < N; ++k) {
    const auto K = static_cast<std::size_t>(k);
    out.dV.push_back(out.V[K + 1] - out.V[K]);
    const double err = std::abs(out.dV[K] - out.direct[K]) /
                       (1.0 + std::abs(out.V[K]) + std::abs(out.V[K + 1]));
    out.identity_error = std::max(out.identity_error, err);
  }
  return out;
}

LyapunovTrace lyapunov_trace(const Trajectory& traj, const SystemData& sys,
                             const RadiusCertificate& cert, const IqcSet& iqcs) {
  return lyapunov_trace(traj, sys, cert.P, cert.lambdas, iqcs);
}

double dynamics_residual(const Trajectory& traj, const SystemData& sys) {
  traj.validate(sys);
  double worst = 0.0;
  for (int k = 0; k < traj.steps(); ++k) {
    const auto K = static_cast<std::size_t>(k);
    const Vector r = traj.states[K + 1] - sys.A() * traj.states[K] - sys.B() * traj.inputs[K];
    worst = std::max(worst, r.norm() / (1.0 + traj.states[K].norm()));
  }
  return worst;
}

bool CheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* CheckReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

CheckReport check_witness(const WitnessReport& report, const SystemData& sys,
                          const IqcSet& iqcs, int horizon) {
  iqcs.check_compatible(sys);
  CheckReport out;
  const WorstCaseModes& modes = report.modes;
  auto add = [&](std::string name, double value, double bound, bool passed) {
    out.checks.push_back(Check{std::move(name), passed, value, bound});
  };
  const int d = modes.d;
  const bool shapes_ok = modes.v && modes.X.rows() == sys.n() && modes.X.cols() == d &&
                         modes.U.rows() == sys.m() && modes.U.cols() == d &&
                         modes.F.rows() == d && modes.F.cols() == d && modes.v->size() == d &&
                         static_cast<int>(modes.H.size()) == iqcs.size();
  add("shapes", shapes_ok ? 0.0 : 1.0, 0.0, shapes_ok);
  if (!shapes_ok) return out;
  const Vector& v = *modes.v;

  const double orth = (modes.F.transpose() * modes.F - Matrix::Identity(d, d)).norm();
  add("orthogonality", orth, 1e-8, orth <= 1e-8);

  const Trajectory traj = build_trajectory(modes, horizon);
  const double dyn = dynamics_residual(traj, sys);
  add("dynamics", dyn, 1e-8, dyn <= 1e-8);

  double norm_drift = 0.0;
  {
    Vector z = v;
    for (int k = 0; k <= horizon; ++k) {
      norm_drift = std::max(norm_drift, std::abs(z.norm() - v.norm()));
      z = modes.F * z;
    }
  }
  add("orbit-norm", norm_drift, 1e-9, norm_drift <= 1e-9);

  const double xv = (modes.X * v).norm();
  add("state-nonzero", xv, 1e-8, xv >= 1e-8);

  Matrix XU(sys.n() + sys.m(), d);
  XU << modes.X, modes.U;
  double form_err = 0.0;
  double tc_worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < iqcs.size(); ++i) {
    const Matrix H = linalg::symmetrize(XU.transpose() * iqcs[i] * XU);
    const Matrix& Hs = modes.H[static_cast<std::size_t>(i)];
    form_err = std::max(form_err, (H - Hs).norm() / (1.0 + H.norm()));
    const double slack = v.dot(averaged_form(modes.groups, H) * v) + 1e-8 * (1.0 + H.norm());
    tc_worst = std::min(tc_worst, slack);
  }
  add("iqc-forms", form_err, 1e-9, form_err <= 1e-9);
  if (iqcs.size() > 0) add("technical-condition", tc_worst, 0.0, tc_worst >= 0.0);

  const std::vector<double> beta = iqc_sum_lower_bound(modes);
  double beta_err = 0.0;
  if (report.beta.size() != beta.size()) {
    beta_err = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 0; i < beta.size(); ++i) {
      beta_err = std::max(beta_err, std::abs(beta[i] - report.beta[i]) / (1.0 + std::abs(beta[i])));
    }
  }
  add("beta", beta_err, 1e-9, beta_err <= 1e-9);

  if (iqcs.size() > 0 && report.beta.size() == static_cast<std::size_t>(iqcs.size())) {
    const auto sums = iqc_partial_sums(traj, iqcs);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sums.size(); ++i) {
      for (double s : sums[i]) worst = std::min(worst, s - report.beta[i]);
    }
    add("iqc-sums", worst, -1e-6, worst >= -1e-6);
  }

  if (report.K) {
    const Matrix& K = *report.K;
    double worst = 0.0;
    bool ok = K.rows() == sys.m() && K.cols() == sys.n();
    if (ok) {
      for (int k = 0; k < traj.steps(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double e = (traj.inputs[kk] - K * traj.states[kk]).norm() /
                         (1.0 + traj.inputs[kk].norm());
        worst = std::max(worst, e);
      }
    } else {
      worst = std::numeric_limits<double>::infinity();
    }
    add("feedback", worst, 1e-6, ok && worst <= 1e-6);
  }
  return out;
}

BoundednessDiagnostic boundedness_diagnostic(const Trajectory& traj) {
  BoundednessDiagnostic out;
  std::vector<double> k, nrm, lk, ln;
  const std::size_t N = traj.states.size();
  for (std::size_t i = 0; i < N; ++i) {
    const double x = traj.states[i].norm();
    out.max_norm = std::max(out.max_norm, x);
    k.push_back(static_cast<double>(i));
    nrm.push_back(x);
    if (i >= N / 2) {
      lk.push_back(std::log1p(static_cast<double>(i)));
      ln.push_back(std::log1p(x));
    }
  }
  if (N > 0) out.final_norm = nrm.back();
  out.linear_slope = regression_slope(k, nrm);
  out.power_exponent = regression_slope(lk, ln);
  out.growing = out.power_exponent > 0.5;
  return out;
}

}  // namespace iqcrad
