#pragma once

#include <array>
#include <vector>

#include "clm/image.hpp"
#include "clm/matrix.hpp"

namespace clm {

constexpr int kRawFeatureChannels = 17;
constexpr int kGradDescriptorDim = 128;  // 4x4 cells x 8 orientation bins
constexpr int kLogCovDescriptorDim = kRawFeatureChannels * (kRawFeatureChannels + 1) / 2;
constexpr int kEnrichDims = 6;

// Per-pixel 17-channel feature stack. Channel order is fixed:
//  0: intensity
//  1: I_x   2: I_y   3: I_xx   4: I_yy          (central differences)
//  5: |I_x| 6: |I_y| 7: |I_xx| 8: |I_yy|
//  9: gradient magnitude
// 10: cos(theta)  11: sin(theta)                 (zero where magnitude is 0)
// 12: Laplacian I_xx + I_yy
// 13: x/W  14: y/H
// 15: local 3x3 mean  16: local 3x3 standard deviation
struct RawFeatureMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // height * width * 17, channel-minor

  const double* at(int x, int y) const {
    return values.data() + (static_cast<size_t>(y) * width + x) * kRawFeatureChannels;
  }
};

struct DescriptorSet {
  Matrix descriptors;  // N x k
  std::vector<std::array<double, 2>> positions;  // patch centers, pixel coords
  Vec scales;  // cell size; the support window side is 4 * scale

  int count() const { return descriptors.rows(); }
  int dim() const { return descriptors.cols(); }
};

RawFeatureMap raw_feature_map(const ImageGray& img);

// Dense SIFT-like descriptors: per grid point and cell size, 4x4 spatial
// cells x 8 orientation bins of bilinearly binned gradient magnitude,
// L2-normalized, clipped at 0.2, renormalized. Patch side = 4 * cell.
DescriptorSet dense_grad_descriptors(const ImageGray& img,
                                     const std::vector<int>& cell_sizes,
                                     int step);

// Log-covariance patch descriptors over the 17 raw channels:
// cov + 1e-3 I, matrix log, half-vectorize -> 153 dims.
DescriptorSet logcov_descriptors(const ImageGray& img, int patch, int step);

// Appends 6 cue dims per descriptor: normalized x, normalized y,
// log2(scale), mean window intensity, mean window gradient magnitude,
// window intensity entropy (32-bin histogram).
DescriptorSet enrich(const DescriptorSet& ds, const ImageGray& img);

}  // namespace clm
