#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "iqcrad/model.hpp"
#include "iqcrad/radius.hpp"
#include "iqcrad/sdp.hpp"

namespace iqcrad {

using CMatrix = Eigen::MatrixXcd;

/// Eigenvalues e^{i theta} of F sharing one angle, with an orthonormal basis
/// of the corresponding eigenspace.
struct EigenGroup {
  double theta = 0.0;
  CMatrix W;
  int multiplicity() const { return static_cast<int>(W.cols()); }
};

struct WorstCaseModes {
  Matrix Q;
  int d = 0;
  Matrix X;  // n x d
  Matrix U;  // m x d
  Matrix F;  // d x d orthogonal
  std::vector<EigenGroup> groups;
  /// [X; U]^T M_i [X; U].
  std::vector<Matrix> H;
  std::optional<Vector> v;
  std::vector<std::string> warnings;
};

struct WitnessReport {
  WorstCaseModes modes;
  Trajectory trajectory;
  std::optional<Matrix> K;
  /// Lower bounds on every partial IQC sum along the trajectory.
  std::vector<double> beta;
  /// Shift after which the single IQC holds as a hard IQC (sums >= 0).
  std::optional<int> hard_shift;
  bool pointwise = false;
};

enum class PipelineStage {
  radius_precheck,
  input_rank,
  dual_extraction,
  factorization,
  orthogonal_factor,
  technical_condition,
  complete,
};

std::string to_string(PipelineStage stage);

struct WorstCaseOptions {
  RadiusOptions radius;
  /// Relative eigenvalue cutoff for rank(Q).
  double rank_tol = 1e-7;
  /// Relative singular-value cutoff for rank(X).
  double x_rank_tol = 1e-8;
  double angle_tol = 1e-6;
  int horizon = 10000;
  int hard_window = 10000;
  /// Skip the radius bisection (the caller already knows rho is about 1).
  bool skip_precheck = false;
};

struct WorstCaseOutcome {
  std::optional<WitnessReport> report;
  /// Stage that stopped the pipeline, or `complete`.
  PipelineStage stage = PipelineStage::radius_precheck;
  std::string reason;
  std::optional<RadiusCertificate> radius;
};

struct DualWitness {
  enum class Status { found, infeasible, solver_failure };
  Status status = Status::solver_failure;
  Matrix Q;
  double d_star = 0.0;
  std::string diagnostic;
};

/// Nonzero Q >= 0 with tr Q = 1, L^*(Q) = 0 and tr(Q M_i) >= 0, from the dual
/// margin problem at rho = 1. The interior-point optimum is projected onto its
/// face so that L^*(Q) = 0 holds to rounding.
DualWitness extract_dual_witness(const SystemData& sys, const IqcSet& iqcs,
                                 const sdp::SolverConfig& config = {});

struct RankFactor {
  Matrix X;
  Matrix U;
  int d = 0;
};

/// Q = [X; U][X; U]^T keeping eigenvalues above rank_tol * lambda_max(Q).
RankFactor rank_factor(const Matrix& Q, int n, double rank_tol = 1e-7);

/// Orthogonal F minimizing ||X F - G||_F. Directions outside the ranges of
/// X^T G are completed as close to the identity as possible.
Matrix recover_orthogonal_factor(const Matrix& X, const Matrix& G);

struct EigenGrouping {
  std::vector<EigenGroup> groups;
  std::vector<std::string> warnings;
};

/// Unitary eigendecomposition of an orthogonal F, with eigenvalue angles in
/// [0, 2pi) clustered within angle_tol and ordered by increasing angle.
EigenGrouping eigen_group(const Matrix& F, double angle_tol = 1e-6);

/// Re(sum_j W_j W_j^* H W_j W_j^*), the averaged form in the technical condition.
Matrix averaged_form(const std::vector<EigenGroup>& groups, const Matrix& H);

struct TechnicalConditionResult {
  std::optional<Vector> v;
  /// "single-mode", "distinct-eigenvalues" or "relaxation" when v is found.
  std::string method;
  std::string diagnostic;
};

/// Looks for real v with v^T (averaged H_i) v >= 0 for all i and X v != 0:
/// first d = 1, then distinct eigenvalues of F, then a trace-minimizing SDP
/// relaxation with rank-one extraction.
TechnicalConditionResult technical_condition(const WorstCaseModes& modes, const IqcSet& iqcs,
                                             const sdp::SolverConfig& config = {});

/// [x_k; u_k] = [X; U] F^k v for k = 0..N (inputs up to N-1).
Trajectory build_trajectory(const WorstCaseModes& modes, int horizon);

std::vector<double> iqc_sum_lower_bound(const WorstCaseModes& modes);

/// K = U X^+ when X has full column rank.
std::optional<Matrix> feedback_gain(const WorstCaseModes& modes, double rank_tol = 1e-8);

struct HardShift {
  std::optional<int> shift;
  std::string diagnostic;
};

HardShift hard_iqc_shift(const WorstCaseModes& modes, const IqcSet& iqcs, int window = 10000);

/// d = 1, confirmed on the first `steps` summands of the trajectory.
bool pointwise_check(const WorstCaseModes& modes, const IqcSet& iqcs, int steps = 1000);

/// Full pipeline: radius precheck, input rank gate, dual witness, factoring,
/// orthogonal factor, eigen-groups, technical condition, trajectory.
WorstCaseOutcome worst_case(const SystemData& sys, const IqcSet& iqcs,
                            const WorstCaseOptions& opts = {});

}  // namespace iqcrad
