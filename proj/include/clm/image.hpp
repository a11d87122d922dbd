#pragma once

#include <string>
#include <vector>

namespace clm {

// Minimum width/height required before an image is considered usable
// for statistical modeling.
constexpr int kMinModelSize = 64;

struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major intensities in [0,1]

  double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }

  // Replicate-border access.
  double at_clamped(int x, int y) const;

  bool valid() const {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<size_t>(width) * height;
  }
  bool meets_min_size() const { return std::min(width, height) >= kMinModelSize; }
};

// Loads a PGM (P2/P5) or PNG file as grayscale in [0,1]. Color input is
// converted via 0.299/0.587/0.114 luminance. Throws UnreadableImage.
ImageGray load_image(const std::string& path);

void save_pgm(const ImageGray& img, const std::string& path);

ImageGray crop(const ImageGray& img, int x0, int y0, int x1, int y1);

// Bilinear resize.
ImageGray resize(const ImageGray& img, int new_width, int new_height);

}  // namespace clm
