#pragma once

#include "iqcrad/model.hpp"

namespace iqcrad::linalg {

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Largest singular value; 0 for empty matrices.
double spectral_norm(const Matrix& M);

/// Extreme eigenvalues of the symmetric part of M. Empty matrices give 0.
double min_eigenvalue(const Matrix& M);
double max_eigenvalue(const Matrix& M);

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
Matrix pseudo_inverse(const Matrix& M, double rel_tol = 1e-12);

/// Orthogonal polar factor of a square matrix (U V^T from its SVD).
Matrix polar_factor(const Matrix& M);

/// Inverse square root of a symmetric positive definite matrix.
Matrix inverse_sqrt_spd(const Matrix& M);

/// Orthonormal basis for the null space of M (relative cutoff on singular
/// values). Returns cols x k.
Matrix null_space(const Matrix& M, double rel_tol = 1e-10);

/// Spectral radius max |eig(A)|.
double spectral_radius(const Matrix& A);

}  // namespace iqcrad::linalg
