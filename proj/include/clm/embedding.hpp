#pragma once

#include "clm/gaussian.hpp"
#include "clm/matrix.hpp"

namespace clm {

struct EmbeddingParams {
  double beta = 0.4;  // mean/covariance balance, >= 0
  double rho = 0.5;   // eigenvalue power normalization exponent, (0, 1]

  bool operator==(const EmbeddingParams&) const = default;
};

// Gaussian embedded as a (k+1)x(k+1) SPD matrix
//   S = [[Sigma^rho + beta^2 mu mu^T, beta mu], [beta mu^T, 1]]
// with its matrix log g and half-vectorization f.
struct EmbeddedGaussian {
  Matrix s;
  Matrix g;
  Vec f;
  EmbeddingParams params;

  int dim() const { return s.rows(); }
};

EmbeddedGaussian embed(const GaussianModel& gm, const EmbeddingParams& p);

// Log-Euclidean distance ||a.f - b.f||_2 == ||a.g - b.g||_F.
// Throws ParamMismatch when params or dims differ.
double gauss_distance(const EmbeddedGaussian& a, const EmbeddedGaussian& b);

}  // namespace clm
