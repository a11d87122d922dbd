#include "clm/gaussian.hpp"

#include <numeric>

#include "clm/errors.hpp"

namespace clm {

namespace {

constexpr int kPairwiseBlock = 64;

// Pairwise (tree) sum of descriptor rows over indices [lo, hi).
Vec pairwise_row_sum(const Matrix& x, const std::vector<int>& rows, size_t lo, size_t hi) {
  const int k = x.cols();
  if (hi - lo <= kPairwiseBlock) {
    Vec s(k, 0.0);
    for (size_t i = lo; i < hi; ++i) {
      const double* r = x.row_ptr(rows[i]);
      for (int c = 0; c < k; ++c) s[c] += r[c];
    }
    return s;
  }
  const size_t mid = lo + (hi - lo) / 2;
  Vec a = pairwise_row_sum(x, rows, lo, mid);
  const Vec b = pairwise_row_sum(x, rows, mid, hi);
  for (int c = 0; c < k; ++c) a[c] += b[c];
  return a;
}

// Pairwise sum of centered outer products, upper triangle only.
Matrix pairwise_outer_sum(const Matrix& x, const std::vector<int>& rows, const Vec& mean,
                          size_t lo, size_t hi) {
  const int k = x.cols();
  if (hi - lo <= kPairwiseBlock) {
    Matrix s(k, k);
    Vec d(k);
    for (size_t i = lo; i < hi; ++i) {
      const double* r = x.row_ptr(rows[i]);
      for (int c = 0; c < k; ++c) d[c] = r[c] - mean[c];
      for (int a = 0; a < k; ++a) {
        const double da = d[a];
        if (da == 0.0) continue;
        double* sa = s.row_ptr(a);
        for (int b = a; b < k; ++b) sa[b] += da * d[b];
      }
    }
    return s;
  }
  const size_t mid = lo + (hi - lo) / 2;
  Matrix a = pairwise_outer_sum(x, rows, mean, lo, mid);
  const Matrix b = pairwise_outer_sum(x, rows, mean, mid, hi);
  for (size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
  return a;
}

}  // namespace

GaussianModel fit_gaussian_rows(const Matrix& descriptors, const std::vector<int>& rows,
                                double epsilon) {
  const size_t n = rows.size();
  if (n < 2) throw TooFewSamples("fit_gaussian: need at least 2 descriptors");
  if (!descriptors.all_finite()) throw Error("fit_gaussian: non-finite descriptors");
  const int k = descriptors.cols();

  GaussianModel gm;
  gm.mean = pairwise_row_sum(descriptors, rows, 0, n);
  for (double& v : gm.mean) v /= static_cast<double>(n);

  gm.covariance = pairwise_outer_sum(descriptors, rows, gm.mean, 0, n);
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      gm.covariance(a, b) *= inv;
      gm.covariance(b, a) = gm.covariance(a, b);
    }
    gm.covariance(a, a) += epsilon;
  }
  return gm;
}

GaussianModel fit_gaussian(const DescriptorSet& ds, double epsilon) {
  std::vector<int> rows(ds.count());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_gaussian_rows(ds.descriptors, rows, epsilon);
}

}  // namespace clm
