#pragma once

#include <utility>
#include <vector>

#include "iqcrad/model.hpp"

namespace iqcrad {

/// x_{k+1} = A x_k + B u_k,  y_k = C x_k + D u_k.
struct PlantData {
  Matrix A, B, C, D;
  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
  void validate() const;
};

/// psi_{k+1} = A_psi psi_k + B1 y_k + B2 u_k,  z_k = C_psi psi_k + D1 y_k + D2 u_k,
/// with the IQC sum_k z_k^T M z_k >= beta.
struct IqcFilter {
  Matrix A_psi, B1, B2, C_psi, D1, D2, M;
  int states() const { return static_cast<int>(A_psi.rows()); }
  int outputs() const { return static_cast<int>(C_psi.rows()); }
  void validate(const PlantData& plant) const;
};

struct Augmented {
  SystemData sys;
  IqcSet iqcs;
};

/// Static form on the state [x; psi]: the filter dynamics join the plant.
Augmented augment(const PlantData& plant, const IqcFilter& filter);

/// Several filters at once, state ordered [x; psi_1; psi_2; ...]. Each IQC
/// only involves its own filter states.
Augmented augment(const PlantData& plant, const std::vector<IqcFilter>& filters);

}  // namespace iqcrad
