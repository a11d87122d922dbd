#include "clm/pbr.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <vector>

#include "clm/errors.hpp"

namespace clm {

namespace {

using Cplx = std::complex<double>;

// Saliency is computed at most at this resolution; spectral residual
// works on coarse structure, and the naive DFT below is O(n^3).
constexpr int kSaliencyMaxDim = 128;

// Naive 1D DFT applied along rows; `sign` -1 forward, +1 inverse
// (unscaled).
std::vector<Cplx> dft_rows(const std::vector<Cplx>& in, int width, int height, int sign) {
  std::vector<Cplx> tw(width * width);
  for (int k = 0; k < width; ++k)
    for (int x = 0; x < width; ++x)
      tw[static_cast<size_t>(k) * width + x] =
          std::polar(1.0, sign * 2.0 * M_PI * k * x / width);
  std::vector<Cplx> out(in.size());
  for (int y = 0; y < height; ++y) {
    const Cplx* row = in.data() + static_cast<size_t>(y) * width;
    Cplx* orow = out.data() + static_cast<size_t>(y) * width;
    for (int k = 0; k < width; ++k) {
      Cplx s = 0.0;
      const Cplx* twk = tw.data() + static_cast<size_t>(k) * width;
      for (int x = 0; x < width; ++x) s += row[x] * twk[x];
      orow[k] = s;
    }
  }
  return out;
}

std::vector<Cplx> transpose(const std::vector<Cplx>& in, int width, int height) {
  std::vector<Cplx> out(in.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<size_t>(x) * height + y] = in[static_cast<size_t>(y) * width + x];
  return out;
}

std::vector<Cplx> dft2(const std::vector<Cplx>& in, int width, int height, int sign) {
  auto tmp = dft_rows(in, width, height, sign);
  tmp = transpose(tmp, width, height);
  tmp = dft_rows(tmp, height, width, sign);
  return transpose(tmp, height, width);
}

std::vector<double> box3(const std::vector<double>& in, int width, int height) {
  std::vector<double> out(in.size());
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return in[static_cast<size_t>(y) * width + x];
  };
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += at(x + dx, y + dy);
      out[static_cast<size_t>(y) * width + x] = s / 9.0;
    }
  return out;
}

std::vector<double> gauss_smooth(const std::vector<double>& in, int width, int height,
                                 double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;

  std::vector<double> tmp(in.size()), out(in.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += kernel[i + radius] * in[static_cast<size_t>(y) * width + std::clamp(x + i, 0, width - 1)];
      tmp[static_cast<size_t>(y) * width + x] = s;
    }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += kernel[i + radius] * tmp[static_cast<size_t>(std::clamp(y + i, 0, height - 1)) * width + x];
      out[static_cast<size_t>(y) * width + x] = s;
    }
  return out;
}

}  // namespace

SaliencyMap saliency_map(const ImageGray& img) {
  if (!img.valid()) throw Error("saliency_map: invalid image");
  if (img.width < 8 || img.height < 8) throw ImageTooSmall("saliency_map: image below 8x8");

  // A constant image has no residual structure at all; short-circuit
  // instead of normalizing reconstruction noise into a fake peak.
  double plo = img.pixels[0], phi = img.pixels[0];
  for (double v : img.pixels) {
    plo = std::min(plo, v);
    phi = std::max(phi, v);
  }
  if (phi - plo < 1e-12) {
    SaliencyMap flat;
    flat.width = img.width;
    flat.height = img.height;
    flat.values.assign(img.pixels.size(), 0.0);
    return flat;
  }

  ImageGray work = img;
  if (std::max(img.width, img.height) > kSaliencyMaxDim) {
    const double scale = static_cast<double>(kSaliencyMaxDim) / std::max(img.width, img.height);
    work = resize(img, std::max(8, static_cast<int>(std::lround(img.width * scale))),
                  std::max(8, static_cast<int>(std::lround(img.height * scale))));
  }
  const int w = work.width, h = work.height;

  std::vector<Cplx> freq(work.pixels.begin(), work.pixels.end());
  freq = dft2(freq, w, h, -1);

  std::vector<double> log_amp(freq.size());
  for (size_t i = 0; i < freq.size(); ++i) log_amp[i] = std::log(std::abs(freq[i]) + 1e-8);
  const std::vector<double> residual_base = box3(log_amp, w, h);

  for (size_t i = 0; i < freq.size(); ++i) {
    const double resid = log_amp[i] - residual_base[i];
    const double phase = std::arg(freq[i]);
    freq[i] = std::polar(std::exp(resid), phase);
  }
  freq = dft2(freq, w, h, +1);

  std::vector<double> sal(freq.size());
  const double inv_n = 1.0 / (static_cast<double>(w) * h);
  for (size_t i = 0; i < freq.size(); ++i) {
    const double mag = std::abs(freq[i]) * inv_n;
    sal[i] = mag * mag;
  }
  sal = gauss_smooth(sal, w, h, 2.5);

  double lo = sal[0], hi = sal[0];
  for (double v : sal) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) {
    std::fill(sal.begin(), sal.end(), 0.0);
  } else {
    const double inv = 1.0 / (hi - lo);
    for (double& v : sal) v = (v - lo) * inv;
  }

  SaliencyMap map;
  map.width = w;
  map.height = h;
  map.values = std::move(sal);
  if (w != img.width || h != img.height) {
    ImageGray tmp;
    tmp.width = w;
    tmp.height = h;
    tmp.pixels = map.values;
    const ImageGray up = resize(tmp, img.width, img.height);
    map.width = img.width;
    map.height = img.height;
    map.values = up.pixels;
  }
  return map;
}

BoundingBox foreground_bbox(const SaliencyMap& sal, double tau) {
  const int w = sal.width, h = sal.height;
  double vmax = 0.0;
  for (double v : sal.values) vmax = std::max(vmax, v);
  const double thresh = tau * vmax;

  std::vector<char> mask(sal.values.size());
  bool any = false;
  for (size_t i = 0; i < sal.values.size(); ++i) {
    mask[i] = sal.values[i] >= thresh;
    any = any || mask[i];
  }
  if (!any || vmax <= 0.0) return {0, 0, w, h};

  // Largest 4-connected component, first-encountered wins ties.
  std::vector<int> comp(mask.size(), -1);
  int best_id = -1;
  long best_size = 0;
  BoundingBox best{0, 0, w, h};
  int next_id = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t idx = static_cast<size_t>(y) * w + x;
      if (!mask[idx] || comp[idx] >= 0) continue;
      const int id = next_id++;
      long size = 0;
      BoundingBox bb{x, y, x + 1, y + 1};
      std::deque<std::pair<int, int>> queue{{x, y}};
      comp[idx] = id;
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        ++size;
        bb.x0 = std::min(bb.x0, cx);
        bb.y0 = std::min(bb.y0, cy);
        bb.x1 = std::max(bb.x1, cx + 1);
        bb.y1 = std::max(bb.y1, cy + 1);
        const int nx[4] = {cx - 1, cx + 1, cx, cx};
        const int ny[4] = {cy, cy, cy - 1, cy + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
          const size_t nidx = static_cast<size_t>(ny[k]) * w + nx[k];
          if (mask[nidx] && comp[nidx] < 0) {
            comp[nidx] = id;
            queue.emplace_back(nx[k], ny[k]);
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_id = id;
        best = bb;
      }
    }
  }
  (void)best_id;
  return best;
}

BoundingBox expand_bbox(const BoundingBox& bb, const ImageGray& img) {
  if (!(bb.x0 >= 0 && bb.x0 < bb.x1 && bb.x1 <= img.width && bb.y0 >= 0 && bb.y0 < bb.y1 &&
        bb.y1 <= img.height))
    throw DimensionMismatch("expand_bbox: box not valid for image");

  auto variance = [&](int x0, int y0, int x1, int y1) {
    double sum = 0.0, sum2 = 0.0;
    const long n = static_cast<long>(x1 - x0) * (y1 - y0);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const double v = img.at(x, y);
        sum += v;
        sum2 += v * v;
      }
    const double mean = sum / n;
    return std::max(0.0, sum2 / n - mean * mean);
  };

  const double area_ratio =
      static_cast<double>(bb.area()) / (static_cast<double>(img.width) * img.height);
  const double var_whole = variance(0, 0, img.width, img.height);
  const double var_in = variance(bb.x0, bb.y0, bb.x1, bb.y1);
  const double var_ratio = var_whole > 0.0 ? std::min(1.0, var_in / var_whole) : 0.0;

  const double m = std::clamp(0.05 + 0.25 * (1.0 - area_ratio) * var_ratio, 0.05, 0.35);
  const int mx = static_cast<int>(std::lround(m * bb.width()));
  const int my = static_cast<int>(std::lround(m * bb.height()));

  BoundingBox out;
  out.x0 = std::max(0, bb.x0 - mx);
  out.y0 = std::max(0, bb.y0 - my);
  out.x1 = std::min(img.width, bb.x1 + mx);
  out.y1 = std::min(img.height, bb.y1 + my);
  return out;
}

BoundingBox pbr_box(const ImageGray& img) {
  const SaliencyMap sal = saliency_map(img);
  const BoundingBox coarse = foreground_bbox(sal);
  const BoundingBox expanded = expand_bbox(coarse, img);
  if (expanded.width() < kMinModelSize || expanded.height() < kMinModelSize)
    return {0, 0, img.width, img.height};
  return expanded;
}

ImageGray apply_pbr(const ImageGray& img) {
  const BoundingBox box = pbr_box(img);
  if (box.width() == img.width && box.height() == img.height) return img;
  return crop(img, box.x0, box.y0, box.x1, box.y1);
}

}  // namespace clm
