#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iqcrad/model.hpp"

namespace iqcrad::sdp {

/// Handle for a symmetric matrix decision variable. Its dim*(dim+1)/2 free
/// entries occupy consecutive scalar slots starting at `offset`.
struct SymmetricVar {
  int offset = 0;
  int dim = 0;

  /// Scalar slot holding entry (r, c) (and (c, r)).
  int slot(int r, int c) const;
  int slots() const { return dim * (dim + 1) / 2; }
  /// Basis matrix for a slot: E_rr, or E_rc + E_cr off the diagonal.
  Matrix basis(int local_slot) const;
};

struct ScalarVar {
  int index = 0;
};

/// Affine scalar expression: constant + sum_i coeff_i y_i.
class LinearExpr {
 public:
  LinearExpr(double constant = 0.0) : constant_(constant) {}  // NOLINT(runtime/explicit)
  LinearExpr(ScalarVar v) { coeffs_[v.index] = 1.0; }          // NOLINT(runtime/explicit)

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(double s);
  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator*(double s, LinearExpr a) { return a *= s; }
  LinearExpr operator-() const { return -1.0 * (*this); }

  double constant() const { return constant_; }
  const std::map<int, double>& coeffs() const { return coeffs_; }
  double evaluate(const Vector& y) const;

  void add_term(int slot, double coeff);

 private:
  double constant_ = 0.0;
  std::map<int, double> coeffs_;
};

/// Affine symmetric matrix expression C + sum_i y_i F_i of fixed size.
class MatrixExpr {
 public:
  explicit MatrixExpr(int dim = 0);

  static MatrixExpr constant(const Matrix& C);
  /// The variable itself, P.
  static MatrixExpr of(const SymmetricVar& P);
  /// f(P) for a linear map f from dim(P) x dim(P) to out_dim x out_dim.
  static MatrixExpr linear_map(const SymmetricVar& P, int out_dim,
                               const std::function<Matrix(const Matrix&)>& f);
  /// s * M.
  static MatrixExpr scaled(ScalarVar s, const Matrix& M);

  MatrixExpr& operator+=(const MatrixExpr& other);
  MatrixExpr& operator-=(const MatrixExpr& other);
  MatrixExpr& operator*=(double s);
  friend MatrixExpr operator+(MatrixExpr a, const MatrixExpr& b) { return a += b; }
  friend MatrixExpr operator-(MatrixExpr a, const MatrixExpr& b) { return a -= b; }
  friend MatrixExpr operator*(double s, MatrixExpr a) { return a *= s; }

  int dim() const { return dim_; }
  const Matrix& constant_term() const { return constant_; }
  const std::map<int, Matrix>& terms() const { return terms_; }
  Matrix evaluate(const Vector& y) const;

 private:
  void add_term(int slot, const Matrix& F);

  int dim_;
  Matrix constant_;
  std::map<int, Matrix> terms_;
};

LinearExpr trace(const MatrixExpr& E);
/// <C, E> for a constant matrix C.
LinearExpr inner(const Matrix& C, const MatrixExpr& E);

/// A small dense SDP over a vector of scalar unknowns y:
///
///   minimize (or maximize) objective(y)
///   subject to  psd_i(y) >= 0 (PSD), nonneg_j(y) >= 0, eq_k(y) == 0.
class SdpProblem {
 public:
  SymmetricVar add_symmetric(int dim);
  ScalarVar add_scalar();

  void minimize(LinearExpr objective);
  void maximize(LinearExpr objective);

  /// Returns the constraint index used for its multiplier in SdpSolution.
  int add_psd(MatrixExpr expr);
  int add_nonnegative(LinearExpr expr);
  void add_equality(LinearExpr expr);

  int num_scalars() const { return num_scalars_; }
  bool maximizing() const { return maximize_; }
  const LinearExpr& objective() const { return objective_; }
  const std::vector<MatrixExpr>& psd_constraints() const { return psd_; }
  const std::vector<LinearExpr>& nonneg_constraints() const { return nonneg_; }
  const std::vector<LinearExpr>& equalities() const { return equalities_; }

  /// Throws std::invalid_argument if any constraint refers to an undeclared
  /// slot or a PSD constraint has inconsistent size.
  void validate() const;

 private:
  int num_scalars_ = 0;
  bool maximize_ = false;
  LinearExpr objective_;
  std::vector<MatrixExpr> psd_;
  std::vector<LinearExpr> nonneg_;
  std::vector<LinearExpr> equalities_;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure, iteration_limit };

std::string to_string(SolveStatus status);

struct SolverConfig {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 200;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;
  Vector y;
  /// Lagrange multipliers for each PSD / nonnegative constraint.
  std::vector<Matrix> psd_multipliers;
  std::vector<double> nonneg_multipliers;
  /// Constraint violation of y, spectral norm scaled by 1 + |constant term|.
  double primal_residual = 0.0;
  /// Stationarity violation of the multipliers, scaled by 1 + |objective|.
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  /// status == unbounded: improving direction in y.
  std::optional<Vector> ray;
  /// status == infeasible: multipliers proving the constraints inconsistent.
  std::optional<std::vector<Matrix>> infeasibility_certificate;

  Matrix value(const SymmetricVar& P) const;
  double value(ScalarVar s) const { return y(s.index); }
};

/// Pluggable solver entry point.
class SdpSolver {
 public:
  virtual ~SdpSolver() = default;
  virtual SdpSolution solve(const SdpProblem& problem, const SolverConfig& config) const = 0;
};

/// Dense primal-dual path-following method (HKM direction, Mehrotra
/// predictor-corrector) with infeasible start. Equality constraints are
/// eliminated by a null-space parametrization before iterating.
class InteriorPointSolver final : public SdpSolver {
 public:
  SdpSolution solve(const SdpProblem& problem, const SolverConfig& config) const override;
};

const SdpSolver& default_solver();

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config = {});

}  // namespace iqcrad::sdp
