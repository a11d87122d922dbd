#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "clm/errors.hpp"
#include "clm/pbr.hpp"

using namespace clm;

namespace {

ImageGray constant_image(int w, int h, double v) {
  ImageGray img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<size_t>(w) * h, v);
  return img;
}

// Flat background with one noise-textured square: the canonical
// saliency fixture. Broadband texture, not brightness, is what
// spectral residual keys on.
ImageGray blob_image(int w, int h, int bx0, int by0, int bs, uint64_t seed) {
  ImageGray img = constant_image(w, h, 0.5);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int y = by0; y < by0 + bs; ++y)
    for (int x = bx0; x < bx0 + bs; ++x) img.at(x, y) = dist(rng);
  return img;
}

}  // namespace

TEST_CASE("constant image yields a zero saliency map and no crop") {
  const ImageGray img = constant_image(96, 80, 0.42);
  const SaliencyMap sal = saliency_map(img);
  CHECK(sal.width == 96);
  CHECK(sal.height == 80);
  for (double v : sal.values) CHECK(v == 0.0);

  const ImageGray out = apply_pbr(img);
  CHECK(out.width == img.width);
  CHECK(out.height == img.height);
  CHECK(out.pixels == img.pixels);
  const BoundingBox bb = pbr_box(img);
  CHECK(bb.x0 == 0);
  CHECK(bb.y0 == 0);
  CHECK(bb.x1 == 96);
  CHECK(bb.y1 == 80);
}

TEST_CASE("saliency map is normalized to [0,1]") {
  const ImageGray img = blob_image(128, 128, 40, 40, 32, 5);
  const SaliencyMap sal = saliency_map(img);
  double lo = 1e300, hi = -1e300;
  for (double v : sal.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("saliency peaks on the textured region") {
  const ImageGray img = blob_image(128, 128, 48, 48, 24, 9);
  const SaliencyMap sal = saliency_map(img);
  // Mean saliency inside the blob dominates the far background corner.
  double in = 0.0, out = 0.0;
  int nin = 0, nout = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) {
      if (x >= 48 && x < 72 && y >= 48 && y < 72) {
        in += sal.at(x, y);
        ++nin;
      } else if (x < 24 && y < 24) {
        out += sal.at(x, y);
        ++nout;
      }
    }
  CHECK(in / nin > 3.0 * (out / nout + 1e-6));
}

TEST_CASE("foreground_bbox picks the largest component on a synthetic map") {
  SaliencyMap sal;
  sal.width = 20;
  sal.height = 10;
  sal.values.assign(200, 0.0);
  // Small component: 2 pixels. Large component: 3x2 rectangle.
  sal.values[0 * 20 + 1] = 1.0;
  sal.values[0 * 20 + 2] = 1.0;
  for (int y = 5; y < 7; ++y)
    for (int x = 10; x < 13; ++x) sal.values[y * 20 + x] = 0.8;
  const BoundingBox bb = foreground_bbox(sal, 0.5);
  CHECK(bb.x0 == 10);
  CHECK(bb.y0 == 5);
  CHECK(bb.x1 == 13);
  CHECK(bb.y1 == 7);

  // Raising tau excludes the 0.8 block; the 2-pixel strip wins.
  const BoundingBox top = foreground_bbox(sal, 0.9);
  CHECK(top.x0 == 1);
  CHECK(top.x1 == 3);
  CHECK(top.y0 == 0);
  CHECK(top.y1 == 1);
}

TEST_CASE("foreground_bbox handles diagonal (disconnected) pixels") {
  SaliencyMap sal;
  sal.width = 8;
  sal.height = 8;
  sal.values.assign(64, 0.0);
  // Diagonal neighbors are not 4-connected: two 1-pixel components.
  sal.values[1 * 8 + 1] = 1.0;
  sal.values[2 * 8 + 2] = 1.0;
  const BoundingBox bb = foreground_bbox(sal, 0.5);
  CHECK(bb.area() == 1);
  CHECK(bb.x0 == 1);  // first encountered wins the tie
  CHECK(bb.y0 == 1);
}

TEST_CASE("all-zero map falls back to the full image box") {
  SaliencyMap sal;
  sal.width = 12;
  sal.height = 7;
  sal.values.assign(84, 0.0);
  const BoundingBox bb = foreground_bbox(sal, 0.5);
  CHECK(bb.x0 == 0);
  CHECK(bb.y0 == 0);
  CHECK(bb.x1 == 12);
  CHECK(bb.y1 == 7);
}

TEST_CASE("expand_bbox margin obeys the clamp and the formula") {
  // Uniform image: var_ratio = 0 -> minimum margin 0.05.
  const ImageGray flat = constant_image(200, 200, 0.3);
  const BoundingBox bb{50, 50, 150, 150};
  const BoundingBox ex = expand_bbox(bb, flat);
  CHECK(ex.x0 == 45);  // lround(0.05 * 100) = 5
  CHECK(ex.y0 == 45);
  CHECK(ex.x1 == 155);
  CHECK(ex.y1 == 155);

  // Box with all the image variance: margin = 0.05 + 0.25*(1-a)*1.
  ImageGray tex = constant_image(200, 200, 0.3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int y = 50; y < 150; ++y)
    for (int x = 50; x < 150; ++x) tex.at(x, y) = dist(rng);
  const BoundingBox ex2 = expand_bbox(bb, tex);
  // area_ratio = 0.25; var_in/var_whole > 1 clamps to 1 -> m = 0.2375.
  const int margin = static_cast<int>(std::lround(0.2375 * 100));
  CHECK(ex2.x0 == 50 - margin);
  CHECK(ex2.x1 == 150 + margin);
}

TEST_CASE("expand_bbox clamps to image bounds") {
  const ImageGray img = constant_image(100, 100, 0.5);
  const BoundingBox ex = expand_bbox({0, 0, 98, 98}, img);
  CHECK(ex.x0 == 0);
  CHECK(ex.y0 == 0);
  CHECK(ex.x1 == 100);
  CHECK(ex.y1 == 100);
  CHECK_THROWS_AS(expand_bbox({-1, 0, 10, 10}, img), DimensionMismatch);
  CHECK_THROWS_AS(expand_bbox({5, 5, 5, 10}, img), DimensionMismatch);
}

TEST_CASE("apply_pbr crops toward a textured object and keeps it inside") {
  const int bx = 60, by = 70, bs = 48;
  const ImageGray img = blob_image(192, 192, bx, by, bs, 17);
  const BoundingBox box = pbr_box(img);
  const ImageGray out = apply_pbr(img);

  // The crop keeps the object.
  CHECK(box.x0 <= bx);
  CHECK(box.y0 <= by);
  CHECK(box.x1 >= bx + bs);
  CHECK(box.y1 >= by + bs);
  // And sheds a meaningful share of the background.
  CHECK(box.area() < 0.8 * 192.0 * 192.0);
  CHECK(out.width == box.width());
  CHECK(out.height == box.height());
  // Crop content matches the source.
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      CHECK(out.at(x, y) == img.at(box.x0 + x, box.y0 + y));
}

TEST_CASE("crops below the minimum model size are declined") {
  // A tiny textured dot on a 96x96 canvas: tight box + margins stays
  // well under 64, so PBR must decline and return the original.
  const ImageGray img = blob_image(96, 96, 44, 44, 8, 23);
  const BoundingBox box = pbr_box(img);
  const bool full = box.x0 == 0 && box.y0 == 0 && box.x1 == 96 && box.y1 == 96;
  const bool big_enough = box.width() >= 64 && box.height() >= 64;
  CHECK((full || big_enough));
  const ImageGray out = apply_pbr(img);
  CHECK(out.width >= 64);
  CHECK(out.height >= 64);
}
