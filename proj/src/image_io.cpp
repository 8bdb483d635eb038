/* Copyright 2026 The OTSNet Desk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "otsnet/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "otsnet/errors.hpp"

namespace otsnet {
namespace {

// Reads the next header integer, skipping whitespace and '#' comments.
std::size_t header_value(const std::string& bytes, std::size_t& pos, const std::string& what) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos || pos - start > 9) throw ContractError("graymap header: bad " + what);
  return std::stoul(bytes.substr(start, pos - start));
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw ContractError(path.string() + " is not a portable graymap");
  }
  const bool binary = bytes[1] == '5';
  std::size_t pos = 2;
  GrayImage img;
  img.width = header_value(bytes, pos, "width");
  img.height = header_value(bytes, pos, "height");
  const std::size_t maxval = header_value(bytes, pos, "maxval");
  if (img.width == 0 || img.height == 0) throw ContractError(path.string() + ": empty raster");
  if (maxval == 0 || maxval > 255) throw ContractError(path.string() + ": only 8-bit graymaps are supported");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    ++pos;  // single whitespace byte ends the header
    if (bytes.size() < pos + count) throw ContractError(path.string() + ": truncated pixel data");
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<unsigned char>(bytes[pos + i]);
      if (v > maxval) throw ContractError(path.string() + ": pixel above maxval");
      img.pixels[i] = v * scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = header_value(bytes, pos, "pixel");
      if (v > maxval) throw ContractError(path.string() + ": pixel above maxval");
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.height * image.width) throw DimensionError("write_pgm: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  for (double v : image.pixels) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  }
}

void write_pgm_normalized(const std::filesystem::path& path, std::size_t height, std::size_t width,
                          const std::vector<double>& values) {
  GrayImage img{height, width, values};
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double low = *lo, span = *hi - *lo;
    for (double& v : img.pixels) v = span > 0.0 ? (v - low) / span : 0.0;
  }
  write_pgm(path, img);
}

GrayImage resize_bilinear(const GrayImage& image, std::size_t height, std::size_t width) {
  if (image.height == height && image.width == width) return image;
  GrayImage out{height, width, std::vector<double>(height * width, 0.0)};
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
  };
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
    const std::size_t y0 = clamp_index(std::floor(fy), image.height), y1 = std::min(y0 + 1, image.height - 1);
    const double ay = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
      const std::size_t x0 = clamp_index(std::floor(fx), image.width), x1 = std::min(x0 + 1, image.width - 1);
      const double ax = fx - static_cast<double>(x0);
      const auto& p = image.pixels;
      out.pixels[y * width + x] = (1 - ay) * ((1 - ax) * p[y0 * image.width + x0] + ax * p[y0 * image.width + x1]) +
                                  ay * ((1 - ax) * p[y1 * image.width + x0] + ax * p[y1 * image.width + x1]);
    }
  }
  return out;
}

}  // namespace otsnet
