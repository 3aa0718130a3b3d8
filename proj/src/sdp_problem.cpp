#include <stdexcept>
#include <string>

#include "iqcrad/sdp.hpp"

namespace iqcrad::sdp {

int SymmetricVar::slot(int r, int c) const {
  if (r > c) std::swap(r, c);
  return offset + r * dim - r * (r - 1) / 2 + (c - r);
}

Matrix SymmetricVar::basis(int local_slot) const {
  int r = 0;
  int remaining = local_slot;
  while (remaining >= dim - r) {
    remaining -= dim - r;
    ++r;
  }
  const int c = r + remaining;
  Matrix E = Matrix::Zero(dim, dim);
  E(r, c) = 1.0;
  E(c, r) = 1.0;
  return E;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  constant_ += other.constant_;
  for (const auto& [slot, v] : other.coeffs_) coeffs_[slot] += v;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  constant_ -= other.constant_;
  for (const auto& [slot, v] : other.coeffs_) coeffs_[slot] -= v;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [slot, v] : coeffs_) v *= s;
  return *this;
}

void LinearExpr::add_term(int slot, double coeff) { coeffs_[slot] += coeff; }

double LinearExpr::evaluate(const Vector& y) const {
  double out = constant_;
  for (const auto& [slot, v] : coeffs_) out += v * y(slot);
  return out;
}

MatrixExpr::MatrixExpr(int dim) : dim_(dim), constant_(Matrix::Zero(dim, dim)) {}

MatrixExpr MatrixExpr::constant(const Matrix& C) {
  if (C.rows() != C.cols()) throw std::invalid_argument("constant term must be square");
  MatrixExpr e(static_cast<int>(C.rows()));
  e.constant_ = 0.5 * (C + C.transpose());
  return e;
}

MatrixExpr MatrixExpr::of(const SymmetricVar& P) {
  MatrixExpr e(P.dim);
  for (int k = 0; k < P.slots(); ++k) e.add_term(P.offset + k, P.basis(k));
  return e;
}

MatrixExpr MatrixExpr::linear_map(const SymmetricVar& P, int out_dim,
                                  const std::function<Matrix(const Matrix&)>& f) {
  MatrixExpr e(out_dim);
  for (int k = 0; k < P.slots(); ++k) {
    Matrix F = f(P.basis(k));
    if (F.rows() != out_dim || F.cols() != out_dim) {
      throw std::invalid_argument("linear map returned a matrix of the wrong size");
    }
    e.add_term(P.offset + k, 0.5 * (F + F.transpose()));
  }
  return e;
}

MatrixExpr MatrixExpr::scaled(ScalarVar s, const Matrix& M) {
  MatrixExpr e(static_cast<int>(M.rows()));
  e.add_term(s.index, 0.5 * (M + M.transpose()));
  return e;
}

void MatrixExpr::add_term(int slot, const Matrix& F) {
  auto it = terms_.find(slot);
  if (it == terms_.end()) {
    terms_.emplace(slot, F);
  } else {
    it->second += F;
  }
}

MatrixExpr& MatrixExpr::operator+=(const MatrixExpr& other) {
  if (other.dim_ != dim_) {
    throw std::invalid_argument("adding matrix expressions of size " + std::to_string(dim_) +
                                " and " + std::to_string(other.dim_));
  }
  constant_ += other.constant_;
  for (const auto& [slot, F] : other.terms_) add_term(slot, F);
  return *this;
}

MatrixExpr& MatrixExpr::operator-=(const MatrixExpr& other) {
  MatrixExpr neg = other;
  neg *= -1.0;
  return *this += neg;
}

MatrixExpr& MatrixExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [slot, F] : terms_) F *= s;
  return *this;
}

Matrix MatrixExpr::evaluate(const Vector& y) const {
  Matrix out = constant_;
  for (const auto& [slot, F] : terms_) out += y(slot) * F;
  return out;
}

LinearExpr trace(const MatrixExpr& E) {
  LinearExpr out(E.constant_term().trace());
  for (const auto& [slot, F] : E.terms()) out.add_term(slot, F.trace());
  return out;
}

LinearExpr inner(const Matrix& C, const MatrixExpr& E) {
  if (C.rows() != E.dim() || C.cols() != E.dim()) {
    throw std::invalid_argument("inner product size mismatch");
  }
  LinearExpr out(C.cwiseProduct(E.constant_term()).sum());
  for (const auto& [slot, F] : E.terms()) out.add_term(slot, C.cwiseProduct(F).sum());
  return out;
}

SymmetricVar SdpProblem::add_symmetric(int dim) {
  if (dim <= 0) throw std::invalid_argument("symmetric variable needs positive size");
  SymmetricVar v{num_scalars_, dim};
  num_scalars_ += v.slots();
  return v;
}

ScalarVar SdpProblem::add_scalar() { return ScalarVar{num_scalars_++}; }

void SdpProblem::minimize(LinearExpr objective) {
  objective_ = std::move(objective);
  maximize_ = false;
}

void SdpProblem::maximize(LinearExpr objective) {
  objective_ = std::move(objective);
  maximize_ = true;
}

int SdpProblem::add_psd(MatrixExpr expr) {
  psd_.push_back(std::move(expr));
  return static_cast<int>(psd_.size()) - 1;
}

int SdpProblem::add_nonnegative(LinearExpr expr) {
  nonneg_.push_back(std::move(expr));
  return static_cast<int>(nonneg_.size()) - 1;
}

void SdpProblem::add_equality(LinearExpr expr) { equalities_.push_back(std::move(expr)); }

void SdpProblem::validate() const {
  auto check_slot = [&](int slot, const char* where) {
    if (slot < 0 || slot >= num_scalars_) {
      throw std::invalid_argument(std::string(where) + " references undeclared slot " +
                                  std::to_string(slot));
    }
  };
  for (const auto& [slot, v] : objective_.coeffs()) check_slot(slot, "objective");
  for (const auto& c : psd_) {
    if (c.dim() <= 0) throw std::invalid_argument("PSD constraint of size zero");
    for (const auto& [slot, F] : c.terms()) {
      check_slot(slot, "PSD constraint");
      if (F.rows() != c.dim() || F.cols() != c.dim()) {
        throw std::invalid_argument("PSD constraint term has the wrong size");
      }
    }
  }
  for (const auto& c : nonneg_) {
    for (const auto& [slot, v] : c.coeffs()) check_slot(slot, "inequality");
  }
  for (const auto& c : equalities_) {
    for (const auto& [slot, v] : c.coeffs()) check_slot(slot, "equality");
  }
}

Matrix SdpSolution::value(const SymmetricVar& P) const {
  Matrix out(P.dim, P.dim);
  for (int r = 0; r < P.dim; ++r) {
    for (int c = r; c < P.dim; ++c) {
      out(r, c) = y(P.slot(r, c));
      out(c, r) = out(r, c);
    }
  }
  return out;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::numerical_failure:
      return "numerical-failure";
    case SolveStatus::iteration_limit:
      return "iteration-limit";
  }
  return "unknown";
}

}  // namespace iqcrad::sdp
