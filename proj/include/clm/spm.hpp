#pragma once

#include <vector>

#include "clm/descriptors.hpp"
#include "clm/embedding.hpp"

namespace clm {

struct GridLevel {
  int rows = 1;
  int cols = 1;
  int regions() const { return rows * cols; }
  bool operator==(const GridLevel&) const = default;
};

struct PyramidSpec {
  std::vector<GridLevel> levels;

  int block_count() const {
    int b = 0;
    for (const auto& l : levels) b += l.regions();
    return b;
  }
  bool operator==(const PyramidSpec&) const = default;
};

inline PyramidSpec default_pyramid() {
  return PyramidSpec{{{1, 1}, {2, 2}, {1, 3}, {4, 4}}};
}

struct PixelRect {
  int x0, y0, x1, y1;  // half-open
};

struct SpmFeature {
  std::vector<Vec> blocks;  // B weighted region vectors of length d
  Vec block_weights;
  Vec concatenated;  // length B * d
};

// Regular region tiling with floor(i * extent / n) boundaries,
// level-major then row-major order. Regions must span at least 8x8
// pixels, else RegionTooSmall.
std::vector<PixelRect> partition(int width, int height, const PyramidSpec& spec);

// Region weight (1/N_l) / sum_l' (1/N_l'), identical within a level.
Vec spm_weights(const PyramidSpec& spec);

// Per region: select descriptors whose center falls inside (half-open
// boxes), fit a Gaussian, embed, scale f by the region weight, and
// concatenate. Throws EmptyRegion when a region holds < 2 descriptors.
SpmFeature spm_feature(const DescriptorSet& ds, int width, int height,
                       const PyramidSpec& spec, const EmbeddingParams& p,
                       double epsilon = 1e-3);

}  // namespace clm
