#include "clm/spm.hpp"

#include "clm/errors.hpp"
#include "clm/gaussian.hpp"

namespace clm {

std::vector<PixelRect> partition(int width, int height, const PyramidSpec& spec) {
  if (spec.levels.empty()) throw Error("partition: empty pyramid spec");
  std::vector<PixelRect> rects;
  for (const auto& level : spec.levels) {
    if (level.rows < 1 || level.cols < 1) throw Error("partition: grid dimension < 1");
    for (int r = 0; r < level.rows; ++r) {
      const int y0 = r * height / level.rows;
      const int y1 = (r + 1) * height / level.rows;
      for (int c = 0; c < level.cols; ++c) {
        const int x0 = c * width / level.cols;
        const int x1 = (c + 1) * width / level.cols;
        if (x1 - x0 < 8 || y1 - y0 < 8)
          throw RegionTooSmall("partition: region below 8x8 pixels");
        rects.push_back({x0, y0, x1, y1});
      }
    }
  }
  return rects;
}

Vec spm_weights(const PyramidSpec& spec) {
  double denom = 0.0;
  for (const auto& level : spec.levels) denom += 1.0 / level.regions();
  Vec w;
  w.reserve(spec.block_count());
  for (const auto& level : spec.levels) {
    const double wl = (1.0 / level.regions()) / denom;
    for (int i = 0; i < level.regions(); ++i) w.push_back(wl);
  }
  return w;
}

SpmFeature spm_feature(const DescriptorSet& ds, int width, int height,
                       const PyramidSpec& spec, const EmbeddingParams& p,
                       double epsilon) {
  const std::vector<PixelRect> rects = partition(width, height, spec);
  const Vec weights = spm_weights(spec);

  SpmFeature out;
  out.block_weights = weights;
  out.blocks.reserve(rects.size());

  for (size_t b = 0; b < rects.size(); ++b) {
    const PixelRect& r = rects[b];
    std::vector<int> rows;
    for (int i = 0; i < ds.count(); ++i) {
      const double x = ds.positions[i][0];
      const double y = ds.positions[i][1];
      if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) rows.push_back(i);
    }
    if (rows.size() < 2)
      throw EmptyRegion("spm_feature: region " + std::to_string(b) +
                        " holds fewer than 2 descriptors");
    const GaussianModel gm = fit_gaussian_rows(ds.descriptors, rows, epsilon);
    const EmbeddedGaussian eg = embed(gm, p);
    Vec f = eg.f;
    for (double& v : f) v *= weights[b];
    out.blocks.push_back(std::move(f));
  }

  const size_t d = out.blocks.front().size();
  out.concatenated.reserve(d * out.blocks.size());
  for (const Vec& blk : out.blocks)
    out.concatenated.insert(out.concatenated.end(), blk.begin(), blk.end());
  return out;
}

}  // namespace clm
