#include "iqcrad/model.hpp"

#include <cmath>
#include <sstream>

#include "iqcrad/linalg.hpp"

namespace iqcrad {
namespace {

std::string shape(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

void require_finite(const Matrix& M, const char* name) {
  if (!M.allFinite()) throw DimensionError(std::string(name) + " has non-finite entries");
}

}  // namespace

SystemData::SystemData(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() != A_.cols()) {
    throw DimensionError("A must be square, got " + shape(A_));
  }
  if (A_.rows() == 0) throw DimensionError("A must have at least one state");
  if (B_.rows() != A_.rows()) {
    throw DimensionError("B must have " + std::to_string(A_.rows()) + " rows, got " + shape(B_));
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
}

SystemData SystemData::autonomous(Matrix A) {
  const auto n = A.rows();
  return SystemData(std::move(A), Matrix(n, 0));
}

Matrix SystemData::AB() const {
  Matrix out(n(), n() + m());
  out << A_, B_;
  return out;
}

IqcSet::IqcSet(std::vector<Matrix> entries) {
  for (const auto& M : entries) add(M);
}

void IqcSet::add(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw DimensionError("IQC matrix " + std::to_string(entries_.size()) + " must be square, got " +
                         shape(M));
  }
  if (!entries_.empty() && M.rows() != entries_.front().rows()) {
    throw DimensionError("IQC matrix " + std::to_string(entries_.size()) + " is " + shape(M) +
                         " but earlier entries are " + shape(entries_.front()));
  }
  require_finite(M, "IQC matrix");
  const double asym = (M - M.transpose()).norm();
  const double scale = M.norm();
  if (asym > 1e-9 * std::max(scale, 1e-300)) {
    std::ostringstream os;
    os << "IQC matrix " << entries_.size() << " is not symmetric (relative asymmetry "
       << asym / scale << "); using (M + M^T)/2";
    warnings_.push_back(os.str());
  }
  entries_.push_back(linalg::symmetrize(M));
}

void IqcSet::check_compatible(const SystemData& sys) const {
  const int dim = sys.n() + sys.m();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].rows() != dim) {
      throw DimensionError("IQC matrix " + std::to_string(i) + " is " + shape(entries_[i]) +
                           " but the system needs " + std::to_string(dim) + "x" +
                           std::to_string(dim));
    }
  }
}

void Trajectory::validate(const SystemData& sys) const {
  if (states.size() != inputs.size() + 1) {
    throw DimensionError("trajectory has " + std::to_string(states.size()) + " states and " +
                         std::to_string(inputs.size()) + " inputs; expected one more state");
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].size() != sys.n()) {
      throw DimensionError("state " + std::to_string(k) + " has length " +
                           std::to_string(states[k].size()));
    }
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != sys.m()) {
      throw DimensionError("input " + std::to_string(k) + " has length " +
                           std::to_string(inputs[k].size()));
    }
  }
}

double quadratic_form(const Matrix& M, const Vector& x, const Vector& u) {
  if (M.rows() != x.size() + u.size() || M.cols() != M.rows()) {
    throw DimensionError("quadratic form matrix " + shape(M) + " does not match [x; u] of length " +
                         std::to_string(x.size() + u.size()));
  }
  Vector z(x.size() + u.size());
  z << x, u;
  return z.dot(M * z);
}

double inner(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw DimensionError("inner product of " + shape(A) + " and " + shape(B));
  }
  return A.cwiseProduct(B).sum();
}

Matrix lyapunov_operator(const Matrix& P, const SystemData& sys, double rho) {
  const int n = sys.n();
  const int m = sys.m();
  if (P.rows() != n || P.cols() != n) {
    throw DimensionError("P must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                         shape(P));
  }
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix PA = P * A;
  const Matrix PB = P * B;
  Matrix out(n + m, n + m);
  out.topLeftCorner(n, n) = A.transpose() * PA - rho * rho * P;
  out.topRightCorner(n, m) = A.transpose() * PB;
  out.bottomLeftCorner(m, n) = B.transpose() * PA;
  out.bottomRightCorner(m, m) = B.transpose() * PB;
  return linalg::symmetrize(out);
}

Matrix lyapunov_adjoint(const Matrix& Q, const SystemData& sys, double rho) {
  const int n = sys.n();
  const int dim = n + sys.m();
  if (Q.rows() != dim || Q.cols() != dim) {
    throw DimensionError("Q must be " + std::to_string(dim) + "x" + std::to_string(dim) +
                         ", got " + shape(Q));
  }
  const Matrix AB = sys.AB();
  Matrix out = AB * Q * AB.transpose() - rho * rho * Q.topLeftCorner(n, n);
  return linalg::symmetrize(out);
}

std::vector<std::vector<double>> iqc_partial_sums(const Trajectory& traj, const IqcSet& iqcs) {
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(iqcs.size()));
  const int N = traj.steps();
  for (int i = 0; i < iqcs.size(); ++i) {
    auto& row = sums[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(N));
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      acc += quadratic_form(iqcs[i], traj.states[static_cast<std::size_t>(k)],
                            traj.inputs[static_cast<std::size_t>(k)]);
      row.push_back(acc);
    }
  }
  return sums;
}

Trajectory simulate(const SystemData& sys, const Vector& x0, const std::vector<Vector>& inputs) {
  if (x0.size() != sys.n()) {
    throw DimensionError("x0 has length " + std::to_string(x0.size()) + ", expected " +
                         std::to_string(sys.n()));
  }
  Trajectory traj;
  traj.provenance = Provenance::simulated;
  traj.states.reserve(inputs.size() + 1);
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != sys.m()) {
      throw DimensionError("input " + std::to_string(k) + " has length " +
                           std::to_string(inputs[k].size()) + ", expected " +
                           std::to_string(sys.m()));
    }
    traj.states.push_back(sys.A() * traj.states.back() + sys.B() * inputs[k]);
  }
  traj.inputs = inputs;
  return traj;
}

Trajectory simulate(const SystemData& sys, const Vector& x0, int steps) {
  if (sys.m() != 0) throw DimensionError("autonomous simulate requires m = 0");
  return simulate(sys, x0, std::vector<Vector>(static_cast<std::size_t>(steps), Vector(0)));
}

}  // namespace iqcrad
