#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iqcrad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when operands have incompatible shapes. The message names the
/// offending operand.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Discrete-time plant x_{k+1} = A x_k + B u_k.
///
/// B may have zero columns; an n x 0 input matrix is a valid autonomous
/// system. Immutable after construction.
class SystemData {
 public:
  SystemData(Matrix A, Matrix B);

  /// Autonomous system (m = 0).
  static SystemData autonomous(Matrix A);

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }

  /// [A B], n x (n+m).
  Matrix AB() const;

 private:
  Matrix A_;
  Matrix B_;
};

/// Ordered collection of symmetric (n+m) x (n+m) IQC matrices M_i.
///
/// Matrices are symmetrized as (M + M^T)/2 on insertion. If the antisymmetric
/// part exceeds 1e-9 relative to the matrix norm a warning is recorded; the
/// caller decides where warnings go.
class IqcSet {
 public:
  IqcSet() = default;
  explicit IqcSet(std::vector<Matrix> entries);

  void add(const Matrix& M);

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const Matrix& operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<Matrix>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Throws DimensionError unless every entry is (n+m) x (n+m) for `sys`.
  void check_compatible(const SystemData& sys) const;

 private:
  std::vector<Matrix> entries_;
  std::vector<std::string> warnings_;
};

enum class Provenance { simulated, mode_generated };

/// States x_0..x_N and inputs u_0..u_{N-1}.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  Provenance provenance = Provenance::simulated;

  /// Number of (x_k, u_k) pairs, N.
  int steps() const { return static_cast<int>(inputs.size()); }
  /// Throws DimensionError on length or width mismatch against `sys`.
  void validate(const SystemData& sys) const;
};

/// [x; u]^T M [x; u].
double quadratic_form(const Matrix& M, const Vector& x, const Vector& u);

/// Frobenius inner product trace(A^T B).
double inner(const Matrix& A, const Matrix& B);

/// rho-weighted Lyapunov operator
///   [[A^T P A - rho^2 P, A^T P B], [B^T P A, B^T P B]].
/// The result is exactly symmetric.
Matrix lyapunov_operator(const Matrix& P, const SystemData& sys, double rho = 1.0);

/// Adjoint of lyapunov_operator:
///   [A B] Q [A B]^T - rho^2 [I 0] Q [I 0]^T.
Matrix lyapunov_adjoint(const Matrix& Q, const SystemData& sys, double rho = 1.0);

/// S_i(N) = sum_{k<N} [x_k; u_k]^T M_i [x_k; u_k] for N = 1..steps.
/// Outer index is the IQC, inner index is N-1.
std::vector<std::vector<double>> iqc_partial_sums(const Trajectory& traj,
                                                  const IqcSet& iqcs);

Trajectory simulate(const SystemData& sys, const Vector& x0,
                    const std::vector<Vector>& inputs);

/// Zero-input autonomous run of `steps` steps; requires m = 0.
Trajectory simulate(const SystemData& sys, const Vector& x0, int steps);

}  // namespace iqcrad
