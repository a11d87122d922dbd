#pragma once

#include "clm/descriptors.hpp"
#include "clm/matrix.hpp"

namespace clm {

struct GaussianModel {
  Vec mean;           // k
  Matrix covariance;  // k x k, unbiased sample covariance + epsilon I
};

// Maximum-likelihood mean with unbiased (N-1) covariance plus
// epsilon on the diagonal. Accumulation uses pairwise summation so
// large descriptor counts do not drift. Throws TooFewSamples if N < 2.
GaussianModel fit_gaussian(const DescriptorSet& ds, double epsilon = 1e-3);

// Fit restricted to a subset of descriptor rows.
GaussianModel fit_gaussian_rows(const Matrix& descriptors,
                                const std::vector<int>& rows,
                                double epsilon = 1e-3);

}  // namespace clm
