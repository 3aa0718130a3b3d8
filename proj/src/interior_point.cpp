// Dense primal-dual interior-point method for small SDPs in LMI form.
//
// Internally every problem is brought to
//
//   minimize c^T z   subject to   Z = F_0 + sum_i z_i F_i >= 0   (block diagonal)
//
// with multiplier X >= 0 for the block constraint. Its Lagrange dual is
//
//   maximize -<F_0, X>   subject to   <F_i, X> = c_i,  X >= 0.
//
// Equalities of the user problem are removed by writing y = y_p + N z.

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "iqcrad/linalg.hpp"
#include "iqcrad/sdp.hpp"

namespace iqcrad::sdp {
namespace {

using Blocks = std::vector<Matrix>;

struct Block {
  int dim = 0;
  Matrix F0;
  std::vector<Matrix> F;  // one per reduced variable
};

struct Reduced {
  Vector c;
  std::vector<Block> blocks;
  Vector y_particular;
  Matrix null_basis;  // p x p_reduced
  bool inconsistent = false;
};

struct CoreResult {
  SolveStatus status = SolveStatus::numerical_failure;
  Vector z;
  Blocks X;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::optional<Vector> ray;
  std::optional<Blocks> certificate;
};

double blocks_inner(const Blocks& A, const Blocks& B) {
  double s = 0.0;
  for (std::size_t b = 0; b < A.size(); ++b) s += A[b].cwiseProduct(B[b]).sum();
  return s;
}

double blocks_norm(const Blocks& A) { return std::sqrt(blocks_inner(A, A)); }

// Largest alpha with X + alpha dX >= 0 (infinity if dX >= 0 in the X metric).
double max_step(const Matrix& X, const Matrix& dX) {
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix Linv = llt.matrixL().solve(Matrix::Identity(X.rows(), X.cols()));
  const Matrix M = Linv * dX * Linv.transpose();
  const double lmin = linalg::min_eigenvalue(M);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

Reduced reduce(const SdpProblem& problem) {
  const int p = problem.num_scalars();
  Reduced red;

  Vector c = Vector::Zero(p);
  for (const auto& [slot, v] : problem.objective().coeffs()) c(slot) = v;
  if (problem.maximizing()) c = -c;

  // Full-space blocks.
  std::vector<Block> full;
  for (const auto& expr : problem.psd_constraints()) {
    Block b;
    b.dim = expr.dim();
    b.F0 = expr.constant_term();
    b.F.assign(static_cast<std::size_t>(p), Matrix::Zero(b.dim, b.dim));
    for (const auto& [slot, F] : expr.terms()) b.F[static_cast<std::size_t>(slot)] = F;
    full.push_back(std::move(b));
  }
  for (const auto& expr : problem.nonneg_constraints()) {
    Block b;
    b.dim = 1;
    b.F0 = Matrix::Constant(1, 1, expr.constant());
    b.F.assign(static_cast<std::size_t>(p), Matrix::Zero(1, 1));
    for (const auto& [slot, v] : expr.coeffs()) b.F[static_cast<std::size_t>(slot)](0, 0) = v;
    full.push_back(std::move(b));
  }

  const auto& eqs = problem.equalities();
  Matrix E = Matrix::Zero(static_cast<Eigen::Index>(eqs.size()), p);
  Vector f = Vector::Zero(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t k = 0; k < eqs.size(); ++k) {
    for (const auto& [slot, v] : eqs[k].coeffs()) E(static_cast<Eigen::Index>(k), slot) = v;
    f(static_cast<Eigen::Index>(k)) = -eqs[k].constant();
  }

  if (eqs.empty()) {
    red.y_particular = Vector::Zero(p);
    red.null_basis = Matrix::Identity(p, p);
  } else {
    red.y_particular = linalg::pseudo_inverse(E, 1e-12) * f;
    const double resid = (E * red.y_particular - f).norm();
    if (resid > 1e-10 * (1.0 + f.norm())) red.inconsistent = true;
    red.null_basis = linalg::null_space(E, 1e-12);
    if (red.null_basis.size() == 0) red.null_basis = Matrix(p, 0);
  }

  const Eigen::Index q = red.null_basis.cols();
  red.c = red.null_basis.transpose() * c;
  for (auto& b : full) {
    Block rb;
    rb.dim = b.dim;
    rb.F0 = b.F0;
    for (int i = 0; i < p; ++i) {
      if (red.y_particular(i) != 0.0) rb.F0 += red.y_particular(i) * b.F[static_cast<std::size_t>(i)];
    }
    rb.F.assign(static_cast<std::size_t>(q), Matrix::Zero(b.dim, b.dim));
    for (Eigen::Index j = 0; j < q; ++j) {
      for (int i = 0; i < p; ++i) {
        const double w = red.null_basis(i, j);
        if (w != 0.0) rb.F[static_cast<std::size_t>(j)] += w * b.F[static_cast<std::size_t>(i)];
      }
    }
    red.blocks.push_back(std::move(rb));
  }
  return red;
}

CoreResult solve_core(const Vector& c_in, std::vector<Block> blocks, const SolverConfig& cfg) {
  CoreResult out;
  const Eigen::Index p = c_in.size();
  const std::size_t nb = blocks.size();

  // Row scaling of each block and of the objective.
  std::vector<double> block_scale(nb, 1.0);
  for (std::size_t b = 0; b < nb; ++b) {
    double mx = blocks[b].F0.norm();
    for (const auto& F : blocks[b].F) mx = std::max(mx, F.norm());
    if (mx > 0.0) {
      block_scale[b] = 1.0 / mx;
      blocks[b].F0 *= block_scale[b];
      for (auto& F : blocks[b].F) F *= block_scale[b];
    }
  }
  const double c_scale = std::max(c_in.size() > 0 ? c_in.cwiseAbs().maxCoeff() : 0.0, 1e-300);
  const Vector c = c_in.size() > 0 && c_in.cwiseAbs().maxCoeff() > 0 ? Vector(c_in / c_scale)
                                                                      : Vector(c_in);
  const double obj_scale = c_in.size() > 0 && c_in.cwiseAbs().maxCoeff() > 0 ? c_scale : 1.0;

  int total_dim = 0;
  for (const auto& b : blocks) total_dim += b.dim;

  auto unscale_X = [&](const Blocks& Xs) {
    Blocks Xo = Xs;
    for (std::size_t b = 0; b < nb; ++b) Xo[b] *= obj_scale * block_scale[b];
    return Xo;
  };

  Blocks F0(nb);
  double F0_norm = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    F0[b] = blocks[b].F0;
    F0_norm += F0[b].squaredNorm();
  }
  F0_norm = std::sqrt(F0_norm);
  const double c_norm = c.norm();

  Vector z = Vector::Zero(p);
  Blocks X(nb), Z(nb);
  const double xi = 10.0;
  const double eta = 10.0;
  for (std::size_t b = 0; b < nb; ++b) {
    X[b] = xi * Matrix::Identity(blocks[b].dim, blocks[b].dim);
    Z[b] = eta * Matrix::Identity(blocks[b].dim, blocks[b].dim);
  }

  auto apply_F = [&](const Vector& v, std::size_t b) {
    Matrix out = Matrix::Zero(blocks[b].dim, blocks[b].dim);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (v(i) != 0.0) out += v(i) * blocks[b].F[static_cast<std::size_t>(i)];
    }
    return out;
  };
  auto apply_At = [&](const Blocks& Y) {
    Vector out(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        s += blocks[b].F[static_cast<std::size_t>(i)].cwiseProduct(Y[b]).sum();
      }
      out(i) = s;
    }
    return out;
  };

  // Gram matrix of the constraint maps, used to keep A(dX) = r_p exact.
  Matrix gram = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        s += blocks[b].F[static_cast<std::size_t>(i)]
                 .cwiseProduct(blocks[b].F[static_cast<std::size_t>(j)])
                 .sum();
      }
      gram(i, j) = gram(j, i) = s;
    }
  }
  const Eigen::LDLT<Matrix> gram_ldlt(gram);

  int stalled = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it;

    Blocks Zinv(nb), Rd(nb);
    bool ok = true;
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<Matrix> llt(Z[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[b] = llt.solve(Matrix::Identity(blocks[b].dim, blocks[b].dim));
      Zinv[b] = linalg::symmetrize(Zinv[b]);
      Rd[b] = F0[b] + apply_F(z, b) - Z[b];
    }
    if (!ok) {
      out.status = SolveStatus::numerical_failure;
      break;
    }

    const Vector AX = apply_At(X);
    const Vector rp = c - AX;
    const double pobj = c.dot(z);
    const double dobj = -blocks_inner(F0, X);
    const double xz = blocks_inner(X, Z);
    const double mu = xz / std::max(total_dim, 1);
    const double pinf = blocks_norm(Rd) / (1.0 + F0_norm);
    const double dinf = rp.norm() / (1.0 + c_norm);
    const double relgap =
        std::max(std::abs(pobj - dobj), std::abs(xz)) / (1.0 + std::abs(pobj) + std::abs(dobj));

    out.z = z;
    out.X = unscale_X(X);
    out.dual_residual = dinf;
    out.gap = relgap;

    if (pinf <= cfg.feasibility_tol && dinf <= cfg.feasibility_tol && relgap <= cfg.gap_tol) {
      out.status = SolveStatus::optimal;
      return out;
    }

    // Farkas certificate for the LMI: X >= 0, <F_i, X> = 0, <F_0, X> < 0.
    if (it >= 3 && dobj > 0.0 && AX.norm() <= cfg.feasibility_tol * dobj) {
      out.status = SolveStatus::infeasible;
      Blocks cert = X;
      for (auto& Xb : cert) Xb /= dobj;
      out.certificate = unscale_X(cert);
      return out;
    }
    // Improving recession direction: sum z_i F_i >= 0 with c^T z < 0.
    if (it >= 3 && pobj < 0.0) {
      double worst = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        worst = std::max(worst, -linalg::min_eigenvalue(apply_F(z, b)));
      }
      if (worst <= cfg.feasibility_tol * (-pobj)) {
        out.status = SolveStatus::unbounded;
        out.ray = z / (-pobj);
        return out;
      }
    }

    // Schur complement S_ij = <F_i, X F_j Z^{-1}>.
    Matrix S = Matrix::Zero(p, p);
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<Matrix> G(static_cast<std::size_t>(p));
      for (Eigen::Index j = 0; j < p; ++j) {
        G[static_cast<std::size_t>(j)] = X[b] * blocks[b].F[static_cast<std::size_t>(j)] * Zinv[b];
      }
      for (Eigen::Index i = 0; i < p; ++i) {
        const Matrix& Fi = blocks[b].F[static_cast<std::size_t>(i)];
        if (Fi.isZero(0.0)) continue;
        for (Eigen::Index j = 0; j < p; ++j) {
          S(i, j) += Fi.cwiseProduct(G[static_cast<std::size_t>(j)]).sum();
        }
      }
    }
    S = linalg::symmetrize(S);

    Eigen::LDLT<Matrix> ldlt;
    Eigen::LLT<Matrix> llt(S);
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) {
      const double ridge = 1e-14 * std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
      ldlt.compute(S + ridge * Matrix::Identity(p, p));
    }
    // One step of iterative refinement; S is badly conditioned near the optimum.
    auto solve_schur = [&](const Vector& rhs) -> Vector {
      auto raw = [&](const Vector& r) -> Vector {
        return use_llt ? Vector(llt.solve(r)) : Vector(ldlt.solve(r));
      };
      Vector x = raw(rhs);
      x += raw(rhs - S * x);
      return x;
    };

    struct Direction {
      Vector dz;
      Blocks dX, dZ;
    };
    auto direction = [&](const Blocks& Rc) {
      Direction d;
      Blocks T(nb);
      for (std::size_t b = 0; b < nb; ++b) T[b] = (Rc[b] - X[b] * Rd[b]) * Zinv[b];
      Vector rhs(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        double s = -c(i);
        for (std::size_t b = 0; b < nb; ++b) {
          s += blocks[b].F[static_cast<std::size_t>(i)].cwiseProduct(T[b]).sum();
        }
        rhs(i) = s;
      }
      d.dz = p > 0 ? solve_schur(rhs) : Vector(0);
      d.dZ.resize(nb);
      d.dX.resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        d.dZ[b] = Rd[b] + apply_F(d.dz, b);
        d.dX[b] = linalg::symmetrize((Rc[b] - X[b] * d.dZ[b]) * Zinv[b] - X[b]);
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(X[b], d.dX[b]));
        ad = std::min(ad, max_step(Z[b], d.dZ[b]));
      }
      return std::pair{ap, ad};
    };

    Blocks zero(nb);
    for (std::size_t b = 0; b < nb; ++b) zero[b] = Matrix::Zero(blocks[b].dim, blocks[b].dim);
    const Direction aff = direction(zero);
    auto [ap_aff, ad_aff] = step_lengths(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += (X[b] + ap_aff * aff.dX[b]).cwiseProduct(Z[b] + ad_aff * aff.dZ[b]).sum();
    }
    mu_aff /= std::max(total_dim, 1);
    double sigma = mu > 0 ? std::pow(std::max(mu_aff, 0.0) / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    Blocks Rc(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Rc[b] = sigma * mu * Matrix::Identity(blocks[b].dim, blocks[b].dim) - aff.dX[b] * aff.dZ[b];
    }
    Direction dir = direction(Rc);
    auto [ap, ad] = step_lengths(dir);
    // Rounding in the Schur solve lets A(dX) drift from r_p near the optimum;
    // project the corrector direction back onto A(dX) = r_p.
    if (p > 0 && gram_ldlt.info() == Eigen::Success) {
      const Vector w = gram_ldlt.solve(Vector(rp - apply_At(dir.dX)));
      if (w.allFinite()) {
        for (std::size_t b = 0; b < nb; ++b) dir.dX[b] += apply_F(w, b);
        std::tie(ap, ad) = step_lengths(dir);
      }
    }
    const double gamma = 0.95;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    if (!dir.dz.allFinite()) {
      out.status = SolveStatus::numerical_failure;
      return out;
    }

    for (std::size_t b = 0; b < nb; ++b) {
      X[b] = linalg::symmetrize(X[b] + ap * dir.dX[b]);
      Z[b] = linalg::symmetrize(Z[b] + ad * dir.dZ[b]);
    }
    z += ad * dir.dz;

    stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 3) {
      out.status = SolveStatus::numerical_failure;
      return out;
    }
    out.status = SolveStatus::iteration_limit;
  }
  if (out.status != SolveStatus::numerical_failure) out.status = SolveStatus::iteration_limit;
  return out;
}

double primal_violation(const SdpProblem& problem, const Vector& y) {
  double worst = 0.0;
  for (const auto& expr : problem.psd_constraints()) {
    const double lmin = linalg::min_eigenvalue(expr.evaluate(y));
    const double scale = 1.0 + linalg::spectral_norm(expr.constant_term());
    worst = std::max(worst, std::max(0.0, -lmin) / scale);
  }
  for (const auto& expr : problem.nonneg_constraints()) {
    worst = std::max(worst, std::max(0.0, -expr.evaluate(y)) / (1.0 + std::abs(expr.constant())));
  }
  for (const auto& expr : problem.equalities()) {
    worst = std::max(worst, std::abs(expr.evaluate(y)) / (1.0 + std::abs(expr.constant())));
  }
  return worst;
}

}  // namespace

SdpSolution InteriorPointSolver::solve(const SdpProblem& problem,
                                       const SolverConfig& config) const {
  problem.validate();
  if (!(config.feasibility_tol > 0.0) || !(config.gap_tol > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  SdpSolution sol;
  const Reduced red = reduce(problem);
  const int p = problem.num_scalars();
  const std::size_t n_psd = problem.psd_constraints().size();

  auto split_multipliers = [&](const Blocks& X) {
    sol.psd_multipliers.assign(X.begin(), X.begin() + static_cast<std::ptrdiff_t>(n_psd));
    sol.nonneg_multipliers.clear();
    for (std::size_t b = n_psd; b < X.size(); ++b) sol.nonneg_multipliers.push_back(X[b](0, 0));
  };

  if (red.inconsistent) {
    sol.status = SolveStatus::infeasible;
    sol.y = red.y_particular;
    sol.objective = problem.objective().evaluate(sol.y);
    sol.primal_residual = primal_violation(problem, sol.y);
    return sol;
  }

  if (red.null_basis.cols() == 0 || red.blocks.empty()) {
    // Nothing to optimize over (or nothing to satisfy): check the fixed point.
    sol.y = red.y_particular;
    sol.primal_residual = primal_violation(problem, sol.y);
    sol.objective = problem.objective().evaluate(sol.y);
    if (red.null_basis.cols() == 0) {
      sol.status = sol.primal_residual <= config.feasibility_tol ? SolveStatus::optimal
                                                                 : SolveStatus::infeasible;
    } else {
      sol.status = red.c.norm() == 0.0 ? SolveStatus::optimal : SolveStatus::unbounded;
      if (sol.status == SolveStatus::unbounded) {
        sol.ray = red.null_basis * (-red.c);
      }
    }
    return sol;
  }

  CoreResult core = solve_core(red.c, red.blocks, config);
  sol.status = core.status;
  sol.iterations = core.iterations;
  sol.y = red.y_particular + red.null_basis * core.z;
  split_multipliers(core.X);
  sol.dual_residual = core.dual_residual;
  sol.gap = core.gap;
  sol.objective = problem.objective().evaluate(sol.y);
  sol.primal_residual = primal_violation(problem, sol.y);
  if (core.ray) {
    Vector dir = red.null_basis * (*core.ray);
    sol.ray = dir;
    sol.objective = problem.maximizing() ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
  }
  if (core.certificate) sol.infeasibility_certificate = *core.certificate;
  (void)p;
  return sol;
}

const SdpSolver& default_solver() {
  static const InteriorPointSolver solver;
  return solver;
}

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config) {
  return default_solver().solve(problem, config);
}

}  // namespace iqcrad::sdp
