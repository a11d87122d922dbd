#pragma once

#include "clm/image.hpp"

namespace clm {

struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // [0,1], row-major

  double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long area() const { return static_cast<long>(width()) * height(); }
};

// Spectral-residual saliency: log-amplitude minus its 3x3 box-filtered
// version, reconstructed, squared, Gaussian-smoothed (sigma 2.5),
// min-max normalized. Constant images give an all-zero map.
SaliencyMap saliency_map(const ImageGray& img);

// Tight box around the largest 4-connected component of pixels with
// value >= tau * max; full-image box when nothing passes.
BoundingBox foreground_bbox(const SaliencyMap& sal, double tau = 0.5);

// Margin m = clamp(0.05 + 0.25*(1 - area_ratio)*var_ratio, 0.05, 0.35)
// applied per side, clamped to image bounds.
BoundingBox expand_bbox(const BoundingBox& bb, const ImageGray& img);

// Saliency -> bbox -> expansion -> crop. Returns the input unchanged
// when the crop would violate the min-size-64 rule.
ImageGray apply_pbr(const ImageGray& img);

// The box apply_pbr would crop to (full-image box when PBR declines).
BoundingBox pbr_box(const ImageGray& img);

}  // namespace clm
