#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "clm/embedding.hpp"
#include "clm/errors.hpp"
#include "clm/symlin.hpp"

using namespace clm;
using symlin::half_vectorize;
using symlin::spd_log;
using symlin::spd_power;

namespace {

GaussianModel random_gaussian(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  GaussianModel gm;
  gm.mean.resize(k);
  for (double& m : gm.mean) m = dist(rng);
  Matrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = dist(rng);
  gm.covariance = matmul_nt(a, a);
  for (int i = 0; i < k; ++i) gm.covariance(i, i) += 0.3;
  return gm;
}

}  // namespace

TEST_CASE("standard Gaussian with rho=1 embeds to the identity") {
  GaussianModel gm;
  gm.mean = {0.0, 0.0, 0.0};
  gm.covariance = Matrix::identity(3);
  const EmbeddedGaussian eg = embed(gm, {0.4, 1.0});
  CHECK(eg.dim() == 4);
  CHECK(frobenius_dist(eg.s, Matrix::identity(4)) < 1e-12);
  for (double v : eg.f) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("block structure of S follows the closed form") {
  std::mt19937_64 rng(5);
  const GaussianModel gm = random_gaussian(4, rng);
  const double beta = 0.7, rho = 0.5;
  const EmbeddedGaussian eg = embed(gm, {beta, rho});

  const Matrix p = spd_power(gm.covariance, rho);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j)
      CHECK(eg.s(i, j) ==
            doctest::Approx(p(i, j) + beta * beta * gm.mean[i] * gm.mean[j]).epsilon(1e-10));
    CHECK(eg.s(i, 4) == doctest::Approx(beta * gm.mean[i]));
    CHECK(eg.s(4, i) == doctest::Approx(beta * gm.mean[i]));
  }
  CHECK(eg.s(4, 4) == 1.0);
  // S = A diag(Sigma^rho, 1) A^T with A unit-determinant -> SPD.
  CHECK_NOTHROW(symlin::cholesky_lower(eg.s));
  // g and f agree with the direct computation.
  CHECK(frobenius_dist(eg.g, spd_log(eg.s)) < 1e-12);
  const Vec f = half_vectorize(eg.g);
  for (size_t i = 0; i < f.size(); ++i) CHECK(eg.f[i] == doctest::Approx(f[i]));
}

TEST_CASE("beta=0 reduces to the covariance-only embedding") {
  std::mt19937_64 rng(13);
  const GaussianModel a = random_gaussian(3, rng);
  GaussianModel b = a;
  b.mean = {10.0, -4.0, 2.5};  // mean must not matter at beta=0

  const EmbeddedGaussian ea = embed(a, {0.0, 0.5});
  const EmbeddedGaussian eb = embed(b, {0.0, 0.5});
  CHECK(gauss_distance(ea, eb) < 1e-12);

  // Distance equals the log-Euclidean distance between Sigma^rho blocks.
  const GaussianModel c = random_gaussian(3, rng);
  const EmbeddedGaussian ec = embed(c, {0.0, 0.5});
  const double want = frobenius_dist(spd_log(spd_power(a.covariance, 0.5)),
                                     spd_log(spd_power(c.covariance, 0.5)));
  CHECK(gauss_distance(ea, ec) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("one-dimensional hand oracle") {
  // mu=1, sigma^2=4, beta=1, rho=1: S = [[5,1],[1,1]].
  GaussianModel gm;
  gm.mean = {1.0};
  gm.covariance = Matrix(1, 1);
  gm.covariance(0, 0) = 4.0;
  const EmbeddedGaussian eg = embed(gm, {1.0, 1.0});
  CHECK(eg.s(0, 0) == doctest::Approx(5.0));
  CHECK(eg.s(0, 1) == doctest::Approx(1.0));
  CHECK(eg.s(1, 1) == doctest::Approx(1.0));

  // Independent 2x2 log: eigenvalues of [[5,1],[1,1]] are 3 +- sqrt(5).
  const double l1 = 3.0 + std::sqrt(5.0), l2 = 3.0 - std::sqrt(5.0);
  // Eigenvector for l1: (1, l1-5)/norm ~ direction (2, sqrt(5)-... ) -- use atan form.
  const double t = 0.5 * std::atan2(2.0 * 1.0, 5.0 - 1.0);  // rotation angle
  const double c = std::cos(t), s = std::sin(t);
  Matrix want(2, 2);
  want(0, 0) = c * c * std::log(l1) + s * s * std::log(l2);
  want(1, 1) = s * s * std::log(l1) + c * c * std::log(l2);
  want(0, 1) = want(1, 0) = c * s * (std::log(l1) - std::log(l2));
  CHECK(frobenius_dist(eg.g, want) < 1e-10);
}

TEST_CASE("distance is a metric surrogate: symmetry and self-distance") {
  std::mt19937_64 rng(29);
  const EmbeddingParams p{0.4, 0.5};
  const EmbeddedGaussian a = embed(random_gaussian(5, rng), p);
  const EmbeddedGaussian b = embed(random_gaussian(5, rng), p);
  const EmbeddedGaussian c = embed(random_gaussian(5, rng), p);
  CHECK(gauss_distance(a, a) == 0.0);
  CHECK(gauss_distance(a, b) == doctest::Approx(gauss_distance(b, a)));
  CHECK(gauss_distance(a, b) > 0.0);
  CHECK(gauss_distance(a, c) <= gauss_distance(a, b) + gauss_distance(b, c) + 1e-12);
  // ||f_a - f_b|| == ||g_a - g_b||_F (vectorization isometry).
  CHECK(gauss_distance(a, b) == doctest::Approx(frobenius_dist(a.g, b.g)).epsilon(1e-12));
}

TEST_CASE("mismatched params or dims are rejected") {
  std::mt19937_64 rng(31);
  const GaussianModel gm3 = random_gaussian(3, rng);
  const GaussianModel gm4 = random_gaussian(4, rng);
  const EmbeddedGaussian a = embed(gm3, {0.4, 0.5});
  const EmbeddedGaussian b = embed(gm3, {0.5, 0.5});
  const EmbeddedGaussian c = embed(gm4, {0.4, 0.5});
  CHECK_THROWS_AS(gauss_distance(a, b), ParamMismatch);
  CHECK_THROWS_AS(gauss_distance(a, c), ParamMismatch);
}

TEST_CASE("invalid parameters propagate") {
  std::mt19937_64 rng(37);
  const GaussianModel gm = random_gaussian(3, rng);
  CHECK_THROWS_AS(embed(gm, {0.4, 0.0}), InvalidRho);
  CHECK_THROWS_AS(embed(gm, {0.4, 1.2}), InvalidRho);
}

TEST_CASE("f has the expected length") {
  std::mt19937_64 rng(41);
  for (int k = 1; k <= 6; ++k) {
    const EmbeddedGaussian eg = embed(random_gaussian(k, rng), {0.4, 0.5});
    CHECK(static_cast<int>(eg.f.size()) == (k + 1) * (k + 2) / 2);
  }
}
