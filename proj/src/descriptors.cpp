#include "clm/descriptors.hpp"

#include <algorithm>
#include <cmath>

#include "clm/errors.hpp"
#include "clm/symlin.hpp"

namespace clm {

namespace {

void require_usable(const ImageGray& img, const char* who) {
  if (!img.valid()) throw Error(std::string(who) + ": invalid image");
  if (!img.meets_min_size())
    throw ImageTooSmall(std::string(who) + ": min(width,height) < 64");
}

struct GradientField {
  std::vector<double> gx, gy, mag;
};

GradientField gradients(const ImageGray& img) {
  GradientField g;
  const size_t n = img.pixels.size();
  g.gx.resize(n);
  g.gy.resize(n);
  g.mag.resize(n);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = 0.5 * (img.at_clamped(x + 1, y) - img.at_clamped(x - 1, y));
      const double dy = 0.5 * (img.at_clamped(x, y + 1) - img.at_clamped(x, y - 1));
      const size_t i = static_cast<size_t>(y) * img.width + x;
      g.gx[i] = dx;
      g.gy[i] = dy;
      g.mag[i] = std::sqrt(dx * dx + dy * dy);
    }
  }
  return g;
}

}  // namespace

RawFeatureMap raw_feature_map(const ImageGray& img) {
  require_usable(img, "raw_feature_map");
  RawFeatureMap fm;
  fm.width = img.width;
  fm.height = img.height;
  fm.values.resize(static_cast<size_t>(img.width) * img.height * kRawFeatureChannels);

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double* f = fm.values.data() +
                  (static_cast<size_t>(y) * img.width + x) * kRawFeatureChannels;
      const double c = img.at(x, y);
      const double xm = img.at_clamped(x - 1, y), xp = img.at_clamped(x + 1, y);
      const double ym = img.at_clamped(x, y - 1), yp = img.at_clamped(x, y + 1);
      const double ix = 0.5 * (xp - xm);
      const double iy = 0.5 * (yp - ym);
      const double ixx = xp - 2.0 * c + xm;
      const double iyy = yp - 2.0 * c + ym;
      const double mag = std::sqrt(ix * ix + iy * iy);

      f[0] = c;
      f[1] = ix;
      f[2] = iy;
      f[3] = ixx;
      f[4] = iyy;
      f[5] = std::abs(ix);
      f[6] = std::abs(iy);
      f[7] = std::abs(ixx);
      f[8] = std::abs(iyy);
      f[9] = mag;
      if (mag > 0.0) {
        f[10] = ix / mag;
        f[11] = iy / mag;
      } else {
        f[10] = 0.0;
        f[11] = 0.0;
      }
      f[12] = ixx + iyy;
      f[13] = static_cast<double>(x) / img.width;
      f[14] = static_cast<double>(y) / img.height;

      double sum = 0.0, sum2 = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = img.at_clamped(x + dx, y + dy);
          sum += v;
          sum2 += v * v;
        }
      const double mean = sum / 9.0;
      f[15] = mean;
      f[16] = std::sqrt(std::max(0.0, sum2 / 9.0 - mean * mean));
    }
  }
  return fm;
}

DescriptorSet dense_grad_descriptors(const ImageGray& img,
                                     const std::vector<int>& cell_sizes,
                                     int step) {
  require_usable(img, "dense_grad_descriptors");
  if (step < 1) throw Error("dense_grad_descriptors: step must be >= 1");
  for (int cs : cell_sizes)
    if (cs < 2) throw Error("dense_grad_descriptors: cell size must be >= 2");

  const GradientField g = gradients(img);
  constexpr int kBins = 8;
  constexpr double kTwoPi = 2.0 * M_PI;

  std::vector<Vec> rows;
  std::vector<std::array<double, 2>> positions;
  Vec scales;

  for (int cs : cell_sizes) {
    const int patch = 4 * cs;
    if (patch > img.width || patch > img.height) continue;
    for (int y0 = 0; y0 + patch <= img.height; y0 += step) {
      for (int x0 = 0; x0 + patch <= img.width; x0 += step) {
        Vec desc(kGradDescriptorDim, 0.0);
        for (int py = 0; py < patch; ++py) {
          for (int px = 0; px < patch; ++px) {
            const size_t i = static_cast<size_t>(y0 + py) * img.width + (x0 + px);
            const double m = g.mag[i];
            if (m <= 0.0) continue;
            double theta = std::atan2(g.gy[i], g.gx[i]);
            if (theta < 0) theta += kTwoPi;
            // Bilinear spatial binning over the 4x4 cell grid, linear
            // over orientation bins.
            const double u = (px + 0.5) / cs - 0.5;
            const double v = (py + 0.5) / cs - 0.5;
            const double ob = theta / kTwoPi * kBins;
            const int u0 = static_cast<int>(std::floor(u));
            const int v0 = static_cast<int>(std::floor(v));
            const int o0 = static_cast<int>(std::floor(ob)) % kBins;
            const double wu = u - std::floor(u);
            const double wv = v - std::floor(v);
            const double wo = ob - std::floor(ob);
            for (int du = 0; du <= 1; ++du) {
              const int cu = u0 + du;
              if (cu < 0 || cu > 3) continue;
              const double fu = du ? wu : 1.0 - wu;
              for (int dv = 0; dv <= 1; ++dv) {
                const int cv = v0 + dv;
                if (cv < 0 || cv > 3) continue;
                const double fv = dv ? wv : 1.0 - wv;
                for (int dw = 0; dw <= 1; ++dw) {
                  const int co = (o0 + dw) % kBins;
                  const double fo = dw ? wo : 1.0 - wo;
                  desc[(cv * 4 + cu) * kBins + co] += m * fu * fv * fo;
                }
              }
            }
          }
        }
        double energy = 0.0;
        for (double d : desc) energy += d * d;
        if (energy >= 1e-12) {
          double inv = 1.0 / std::sqrt(energy);
          for (double& d : desc) d = std::min(d * inv, 0.2);
          energy = 0.0;
          for (double d : desc) energy += d * d;
          inv = 1.0 / std::sqrt(energy);
          for (double& d : desc) d *= inv;
        } else {
          std::fill(desc.begin(), desc.end(), 0.0);
        }
        rows.push_back(std::move(desc));
        positions.push_back({x0 + patch / 2.0, y0 + patch / 2.0});
        scales.push_back(cs);
      }
    }
  }
  if (rows.empty()) throw ImageTooSmall("dense_grad_descriptors: no patch fits");

  DescriptorSet ds;
  ds.descriptors = Matrix(static_cast<int>(rows.size()), kGradDescriptorDim);
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), ds.descriptors.row_ptr(static_cast<int>(i)));
  ds.positions = std::move(positions);
  ds.scales = std::move(scales);
  return ds;
}

DescriptorSet logcov_descriptors(const ImageGray& img, int patch, int step) {
  require_usable(img, "logcov_descriptors");
  if (patch < 8) throw Error("logcov_descriptors: patch must be >= 8");
  if (step < 1) throw Error("logcov_descriptors: step must be >= 1");
  if (patch > img.width || patch > img.height)
    throw ImageTooSmall("logcov_descriptors: patch does not fit");

  const RawFeatureMap fm = raw_feature_map(img);
  const int k = kRawFeatureChannels;
  const int npix = patch * patch;

  std::vector<std::array<double, 2>> positions;
  Vec scales;
  std::vector<Vec> rows;

  for (int y0 = 0; y0 + patch <= img.height; y0 += step) {
    for (int x0 = 0; x0 + patch <= img.width; x0 += step) {
      Vec mean(k, 0.0);
      Matrix cov(k, k);
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px) {
          const double* f = fm.at(x0 + px, y0 + py);
          for (int c = 0; c < k; ++c) mean[c] += f[c];
        }
      for (double& m : mean) m /= npix;
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px) {
          const double* f = fm.at(x0 + px, y0 + py);
          for (int a = 0; a < k; ++a) {
            const double da = f[a] - mean[a];
            double* ca = cov.row_ptr(a);
            for (int b = a; b < k; ++b) ca[b] += da * (f[b] - mean[b]);
          }
        }
      const double inv = 1.0 / (npix - 1);
      for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
          cov(a, b) *= inv;
          cov(b, a) = cov(a, b);
        }
        cov(a, a) += 1e-3;
      }
      rows.push_back(symlin::half_vectorize(symlin::spd_log(cov)));
      positions.push_back({x0 + patch / 2.0, y0 + patch / 2.0});
      scales.push_back(patch / 4.0);
    }
  }

  DescriptorSet ds;
  ds.descriptors = Matrix(static_cast<int>(rows.size()), kLogCovDescriptorDim);
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), ds.descriptors.row_ptr(static_cast<int>(i)));
  ds.positions = std::move(positions);
  ds.scales = std::move(scales);
  return ds;
}

DescriptorSet enrich(const DescriptorSet& ds, const ImageGray& img) {
  if (ds.positions.size() != static_cast<size_t>(ds.count()) ||
      ds.scales.size() != static_cast<size_t>(ds.count()))
    throw Error("enrich: positions/scales not populated");

  const GradientField g = gradients(img);
  const int k = ds.dim();

  DescriptorSet out;
  out.descriptors = Matrix(ds.count(), k + kEnrichDims);
  out.positions = ds.positions;
  out.scales = ds.scales;

  for (int i = 0; i < ds.count(); ++i) {
    std::copy(ds.descriptors.row_ptr(i), ds.descriptors.row_ptr(i) + k,
              out.descriptors.row_ptr(i));
    double* e = out.descriptors.row_ptr(i) + k;

    const double cx = ds.positions[i][0];
    const double cy = ds.positions[i][1];
    const double side = 4.0 * ds.scales[i];
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - side / 2)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - side / 2)));
    const int x1 = std::min(img.width, x0 + static_cast<int>(side));
    const int y1 = std::min(img.height, y0 + static_cast<int>(side));

    double isum = 0.0, msum = 0.0;
    int hist[32] = {0};
    int count = 0;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const double v = img.at(x, y);
        isum += v;
        msum += g.mag[static_cast<size_t>(y) * img.width + x];
        const int bin = std::min(31, static_cast<int>(v * 32.0));
        ++hist[std::max(0, bin)];
        ++count;
      }
    double entropy = 0.0;
    for (int b = 0; b < 32; ++b) {
      if (hist[b] == 0) continue;
      const double p = static_cast<double>(hist[b]) / count;
      entropy -= p * std::log2(p);
    }
    e[0] = cx / img.width;
    e[1] = cy / img.height;
    e[2] = std::log2(ds.scales[i]);
    e[3] = isum / count;
    e[4] = msum / count;
    e[5] = entropy;
  }
  return out;
}

}  // namespace clm
