#include "clm/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "clm/errors.hpp"

namespace clm {

double ImageGray::at_clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return at(x, y);
}

namespace {

int pgm_next_int(std::istream& in) {
  // Skips whitespace and '#' comment lines.
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw UnreadableImage("pgm: unexpected end of header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value;
  if (!(in >> value)) throw UnreadableImage("pgm: malformed header token");
  return value;
}

ImageGray load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableImage("cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P2") throw UnreadableImage("pgm: bad magic in " + path);

  const int width = pgm_next_int(in);
  const int height = pgm_next_int(in);
  const int maxval = pgm_next_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw UnreadableImage("pgm: bad dimensions in " + path);

  ImageGray img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<size_t>(width) * height);
  const double scale = 1.0 / maxval;

  if (magic == "P2") {
    for (auto& p : img.pixels) {
      int v;
      if (!(in >> v)) throw UnreadableImage("pgm: truncated data in " + path);
      p = v * scale;
    }
  } else {
    in.get();  // single whitespace after maxval
    if (maxval < 256) {
      std::vector<unsigned char> buf(img.pixels.size());
      in.read(reinterpret_cast<char*>(buf.data()), buf.size());
      if (!in) throw UnreadableImage("pgm: truncated data in " + path);
      for (size_t i = 0; i < buf.size(); ++i) img.pixels[i] = buf[i] * scale;
    } else {
      std::vector<unsigned char> buf(img.pixels.size() * 2);
      in.read(reinterpret_cast<char*>(buf.data()), buf.size());
      if (!in) throw UnreadableImage("pgm: truncated data in " + path);
      for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = (buf[2 * i] * 256 + buf[2 * i + 1]) * scale;
    }
  }
  return img;
}

ImageGray load_png(const std::string& path) {
  std::unique_ptr<FILE, decltype(&fclose)> fp(fopen(path.c_str(), "rb"), &fclose);
  if (!fp) throw UnreadableImage("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw UnreadableImage("png: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw UnreadableImage("png: allocation failure");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> data;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnreadableImage("png: decode error in " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);

  // Normalize everything to 8-bit RGB.
  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = data.data() + y * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  ImageGray img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.pixels.resize(static_cast<size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* row = data.data() + y * rowbytes;
    for (png_uint_32 x = 0; x < width; ++x) {
      const double r = row[3 * x], g = row[3 * x + 1], b = row[3 * x + 2];
      img.pixels[y * width + x] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    }
  }
  return img;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == suffix;
}

}  // namespace

ImageGray load_image(const std::string& path) {
  if (has_suffix(path, ".pgm")) return load_pgm(path);
  if (has_suffix(path, ".png")) return load_png(path);
  throw UnreadableImage("unsupported image format: " + path);
}

void save_pgm(const ImageGray& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.pixels.size());
  for (size_t i = 0; i < buf.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

ImageGray crop(const ImageGray& img, int x0, int y0, int x1, int y1) {
  if (!(0 <= x0 && x0 < x1 && x1 <= img.width && 0 <= y0 && y0 < y1 && y1 <= img.height))
    throw DimensionMismatch("crop: box out of bounds");
  ImageGray out;
  out.width = x1 - x0;
  out.height = y1 - y0;
  out.pixels.resize(static_cast<size_t>(out.width) * out.height);
  for (int y = y0; y < y1; ++y)
    std::copy(img.pixels.begin() + static_cast<size_t>(y) * img.width + x0,
              img.pixels.begin() + static_cast<size_t>(y) * img.width + x1,
              out.pixels.begin() + static_cast<size_t>(y - y0) * out.width);
  return out;
}

ImageGray resize(const ImageGray& img, int new_width, int new_height) {
  ImageGray out;
  out.width = new_width;
  out.height = new_height;
  out.pixels.resize(static_cast<size_t>(new_width) * new_height);
  const double sx = static_cast<double>(img.width) / new_width;
  const double sy = static_cast<double>(img.height) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    for (int x = 0; x < new_width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      const double v = (1 - wy) * ((1 - wx) * img.at_clamped(x0, y0) + wx * img.at_clamped(x0 + 1, y0)) +
                       wy * ((1 - wx) * img.at_clamped(x0, y0 + 1) + wx * img.at_clamped(x0 + 1, y0 + 1));
      out.pixels[static_cast<size_t>(y) * new_width + x] = v;
    }
  }
  return out;
}

}  // namespace clm
