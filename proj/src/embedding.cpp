#include "clm/embedding.hpp"

#include <cmath>

#include "clm/errors.hpp"
#include "clm/symlin.hpp"

namespace clm {

EmbeddedGaussian embed(const GaussianModel& gm, const EmbeddingParams& p) {
  if (!(p.beta >= 0.0)) throw Error("embed: beta must be >= 0");
  if (!(p.rho > 0.0 && p.rho <= 1.0)) throw InvalidRho("embed: rho must lie in (0, 1]");
  const int k = gm.covariance.rows();
  if (static_cast<int>(gm.mean.size()) != k)
    throw DimensionMismatch("embed: mean/covariance dims differ");

  const Matrix sig_rho = symlin::spd_power(gm.covariance, p.rho);

  EmbeddedGaussian eg;
  eg.params = p;
  eg.s = Matrix(k + 1, k + 1);
  const double b2 = p.beta * p.beta;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double v = sig_rho(i, j) + b2 * gm.mean[i] * gm.mean[j];
      eg.s(i, j) = v;
      eg.s(j, i) = v;
    }
    eg.s(i, k) = p.beta * gm.mean[i];
    eg.s(k, i) = eg.s(i, k);
  }
  eg.s(k, k) = 1.0;

  eg.g = symlin::spd_log(eg.s);
  eg.f = symlin::half_vectorize(eg.g);
  return eg;
}

double gauss_distance(const EmbeddedGaussian& a, const EmbeddedGaussian& b) {
  if (a.dim() != b.dim()) throw ParamMismatch("gauss_distance: dims differ");
  if (!(a.params == b.params)) throw ParamMismatch("gauss_distance: embedding params differ");
  double s = 0.0;
  for (size_t i = 0; i < a.f.size(); ++i) {
    const double d = a.f[i] - b.f[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace clm
