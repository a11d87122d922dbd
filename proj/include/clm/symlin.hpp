#pragma once

#include "clm/matrix.hpp"

namespace clm::symlin {

// Eigenvectors in columns of U, eigenvalues sorted descending.
struct SpectralDecomposition {
  Matrix eigenvectors;
  Vec eigenvalues;
};

// Lower-triangular P with P P^T = sigma and positive diagonal.
// Throws NotPositiveDefinite when a pivot <= 0 arises.
Matrix cholesky_lower(const Matrix& sigma);

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
// Deterministic: eigenvalues descending, each eigenvector's first
// nonzero component made positive. Throws ConvergenceFailure after
// the sweep cap (100).
SpectralDecomposition sym_eig(const Matrix& s);

// Reconstruction U diag(lambda) U^T.
Matrix spectral_reconstruct(const SpectralDecomposition& d);

// Eigenvalue power S^rho = U diag(lambda_i^rho) U^T, rho in (0,1].
Matrix spd_power(const Matrix& s, double rho);

// Matrix logarithm of an SPD matrix via its eigendecomposition.
Matrix spd_log(const Matrix& s);

// Matrix exponential of a symmetric matrix (inverse of spd_log).
Matrix spd_exp(const Matrix& g);

// Upper-triangle unfolding with sqrt(2) scaling on off-diagonal
// entries, so Euclidean distance between vectors equals Frobenius
// distance between matrices. Row-major upper-triangle order.
Vec half_vectorize(const Matrix& g);
Matrix half_unvectorize(const Vec& f, int dim);

// Length of half_vectorize output for a dim x dim matrix.
inline int vec_len(int dim) { return dim * (dim + 1) / 2; }

}  // namespace clm::symlin
