#include "iqcrad/dynamic_iqc.hpp"

#include <sstream>

#include "iqcrad/linalg.hpp"

namespace iqcrad {
namespace {

void expect_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
  if (!M.allFinite()) throw DimensionError(std::string(name) + " has non-finite entries");
}

}  // namespace

void PlantData::validate() const {
  expect_shape(A, A.rows(), A.rows(), "plant A");
  expect_shape(B, n(), B.cols(), "plant B");
  expect_shape(C, C.rows(), n(), "plant C");
  expect_shape(D, p(), m(), "plant D");
}

void IqcFilter::validate(const PlantData& plant) const {
  const int np = states();
  const int q = outputs();
  expect_shape(A_psi, np, np, "filter A_psi");
  expect_shape(B1, np, plant.p(), "filter B1");
  expect_shape(B2, np, plant.m(), "filter B2");
  expect_shape(C_psi, q, np, "filter C_psi");
  expect_shape(D1, q, plant.p(), "filter D1");
  expect_shape(D2, q, plant.m(), "filter D2");
  expect_shape(M, q, q, "filter M");
}

Augmented augment(const PlantData& plant, const IqcFilter& filter) {
  return augment(plant, std::vector<IqcFilter>{filter});
}

Augmented augment(const PlantData& plant, const std::vector<IqcFilter>& filters) {
  plant.validate();
  const int n = plant.n();
  const int m = plant.m();
  int total = n;
  for (const auto& f : filters) {
    f.validate(plant);
    total += f.states();
  }

  Matrix A = Matrix::Zero(total, total);
  Matrix B = Matrix::Zero(total, m);
  A.topLeftCorner(n, n) = plant.A;
  B.topRows(n) = plant.B;
  std::vector<Matrix> Ms;
  int offset = n;
  for (const auto& f : filters) {
    const int np = f.states();
    A.block(offset, 0, np, n) = f.B1 * plant.C;
    A.block(offset, offset, np, np) = f.A_psi;
    B.middleRows(offset, np) = f.B2 + f.B1 * plant.D;

    // z = D1 C x + C_psi psi + (D2 + D1 D) u.
    Matrix L = Matrix::Zero(f.outputs(), total + m);
    L.leftCols(n) = f.D1 * plant.C;
    L.middleCols(offset, np) = f.C_psi;
    L.rightCols(m) = f.D2 + f.D1 * plant.D;
    Ms.push_back(linalg::symmetrize(L.transpose() * linalg::symmetrize(f.M) * L));
    offset += np;
  }
  return Augmented{SystemData(std::move(A), std::move(B)), IqcSet(std::move(Ms))};
}

}  // namespace iqcrad
