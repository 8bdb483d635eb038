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

#include "otsnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "otsnet/errors.hpp"
#include "otsnet/parameters.hpp"
#include "otsnet/vocab.hpp"

namespace otsnet {
namespace {

// Classic 5x7 bitmap font, 0x20 through 0x7E.
constexpr std::array<std::array<std::uint8_t, 5>, 95> kFont = {{
    {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00}, {0x00, 0x07, 0x00, 0x07, 0x00},
    {0x14, 0x7F, 0x14, 0x7F, 0x14}, {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
    {0x36, 0x49, 0x55, 0x22, 0x50}, {0x00, 0x05, 0x03, 0x00, 0x00}, {0x00, 0x1C, 0x22, 0x41, 0x00},
    {0x00, 0x41, 0x22, 0x1C, 0x00}, {0x08, 0x2A, 0x1C, 0x2A, 0x08}, {0x08, 0x08, 0x3E, 0x08, 0x08},
    {0x00, 0x50, 0x30, 0x00, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08}, {0x00, 0x60, 0x60, 0x00, 0x00},
    {0x20, 0x10, 0x08, 0x04, 0x02}, {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
    {0x42, 0x61, 0x51, 0x49, 0x46}, {0x21, 0x41, 0x45, 0x4B, 0x31}, {0x18, 0x14, 0x12, 0x7F, 0x10},
    {0x27, 0x45, 0x45, 0x45, 0x39}, {0x3C, 0x4A, 0x49, 0x49, 0x30}, {0x01, 0x71, 0x09, 0x05, 0x03},
    {0x36, 0x49, 0x49, 0x49, 0x36}, {0x06, 0x49, 0x49, 0x29, 0x1E}, {0x00, 0x36, 0x36, 0x00, 0x00},
    {0x00, 0x56, 0x36, 0x00, 0x00}, {0x08, 0x14, 0x22, 0x41, 0x00}, {0x14, 0x14, 0x14, 0x14, 0x14},
    {0x00, 0x41, 0x22, 0x14, 0x08}, {0x02, 0x01, 0x51, 0x09, 0x06}, {0x32, 0x49, 0x79, 0x41, 0x3E},
    {0x7E, 0x11, 0x11, 0x11, 0x7E}, {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
    {0x7F, 0x41, 0x41, 0x22, 0x1C}, {0x7F, 0x49, 0x49, 0x49, 0x41}, {0x7F, 0x09, 0x09, 0x01, 0x01},
    {0x3E, 0x41, 0x41, 0x51, 0x32}, {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
    {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41}, {0x7F, 0x40, 0x40, 0x40, 0x40},
    {0x7F, 0x02, 0x04, 0x02, 0x7F}, {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
    {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E}, {0x7F, 0x09, 0x19, 0x29, 0x46},
    {0x46, 0x49, 0x49, 0x49, 0x31}, {0x01, 0x01, 0x7F, 0x01, 0x01}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
    {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x7F, 0x20, 0x18, 0x20, 0x7F}, {0x63, 0x14, 0x08, 0x14, 0x63},
    {0x03, 0x04, 0x78, 0x04, 0x03}, {0x61, 0x51, 0x49, 0x45, 0x43}, {0x00, 0x00, 0x7F, 0x41, 0x41},
    {0x02, 0x04, 0x08, 0x10, 0x20}, {0x41, 0x41, 0x7F, 0x00, 0x00}, {0x04, 0x02, 0x01, 0x02, 0x04},
    {0x40, 0x40, 0x40, 0x40, 0x40}, {0x00, 0x01, 0x02, 0x04, 0x00}, {0x20, 0x54, 0x54, 0x54, 0x78},
    {0x7F, 0x48, 0x44, 0x44, 0x38}, {0x38, 0x44, 0x44, 0x44, 0x20}, {0x38, 0x44, 0x44, 0x48, 0x7F},
    {0x38, 0x54, 0x54, 0x54, 0x18}, {0x08, 0x7E, 0x09, 0x01, 0x02}, {0x08, 0x14, 0x54, 0x54, 0x3C},
    {0x7F, 0x08, 0x04, 0x04, 0x78}, {0x00, 0x44, 0x7D, 0x40, 0x00}, {0x20, 0x40, 0x44, 0x3D, 0x00},
    {0x00, 0x7F, 0x10, 0x28, 0x44}, {0x00, 0x41, 0x7F, 0x40, 0x00}, {0x7C, 0x04, 0x18, 0x04, 0x78},
    {0x7C, 0x08, 0x04, 0x04, 0x78}, {0x38, 0x44, 0x44, 0x44, 0x38}, {0x7C, 0x14, 0x14, 0x14, 0x08},
    {0x08, 0x14, 0x14, 0x18, 0x7C}, {0x7C, 0x08, 0x04, 0x04, 0x08}, {0x48, 0x54, 0x54, 0x54, 0x20},
    {0x04, 0x3F, 0x44, 0x40, 0x20}, {0x3C, 0x40, 0x40, 0x20, 0x7C}, {0x1C, 0x20, 0x40, 0x20, 0x1C},
    {0x3C, 0x40, 0x30, 0x40, 0x3C}, {0x44, 0x28, 0x10, 0x28, 0x44}, {0x0C, 0x50, 0x50, 0x50, 0x3C},
    {0x44, 0x64, 0x54, 0x4C, 0x44}, {0x00, 0x08, 0x36, 0x41, 0x00}, {0x00, 0x00, 0x7F, 0x00, 0x00},
    {0x00, 0x41, 0x36, 0x08, 0x00}, {0x10, 0x08, 0x08, 0x10, 0x08},
}};

constexpr std::size_t kGlyphRows = 7;
constexpr std::size_t kCell = 6;

}  // namespace

std::string default_alphabet() {
  std::string out;
  for (char c = '!'; c <= '~'; ++c) out.push_back(c);
  return out;
}

const std::array<std::uint8_t, 5>& glyph_columns(char c) {
  if (!CharVocab::contains(c)) {
    throw IndexError("no glyph for character code " + std::to_string(static_cast<int>(static_cast<unsigned char>(c))));
  }
  return kFont[static_cast<std::size_t>(c - ' ')];
}

void SynthSpec::validate() const {
  if (alphabet.empty()) throw ConfigError("synthetic alphabet is empty");
  for (char c : alphabet) {
    if (!CharVocab::contains(c)) throw ConfigError("alphabet character outside the vocabulary");
  }
  if (min_length < 1 || min_length > max_length) throw ConfigError("synthetic length range is empty");
  if (max_length > max_text_length(width)) {
    throw ConfigError("strings of " + std::to_string(max_length) + " characters do not fit a raster " +
                      std::to_string(width) + " pixels wide (limit " + std::to_string(max_text_length(width)) + ")");
  }
  if (height < kGlyphRows) throw ConfigError("raster height below the 7-row glyph height");
  if (noise.sigma < 0.0 || noise.max_rotation_deg < 0.0) throw ConfigError("noise settings must be non-negative");
  if (!(intensity > 0.0 && intensity <= 1.0)) throw ConfigError("glyph intensity must lie in (0, 1]");
}

std::vector<double> render_text(const std::string& text, std::size_t height, std::size_t width, double intensity,
                                double* scale) {
  if (text.empty()) throw ContractError("cannot render an empty string");
  if (text.size() > max_text_length(width)) {
    throw ContractError("'" + text + "' is too long for a raster " + std::to_string(width) + " pixels wide");
  }
  if (height < kGlyphRows) throw ContractError("raster height below the glyph height");
  // Render the line at natural size first.
  const std::size_t line_width = kCell * text.size() - 1;
  std::vector<double> line(kGlyphRows * line_width, 0.0);
  for (std::size_t k = 0; k < text.size(); ++k) {
    const auto& cols = glyph_columns(text[k]);
    for (std::size_t c = 0; c < 5; ++c) {
      for (std::size_t r = 0; r < kGlyphRows; ++r) {
        if (cols[c] >> r & 1U) line[r * line_width + k * kCell + c] = intensity;
      }
    }
  }
  std::vector<double> image(height * width, 0.0);
  const std::size_t top = (height - kGlyphRows) / 2;
  if (line_width <= width) {
    const std::size_t left = (width - line_width) / 2;
    for (std::size_t r = 0; r < kGlyphRows; ++r) {
      std::copy_n(line.begin() + static_cast<std::ptrdiff_t>(r * line_width), line_width,
                  image.begin() + static_cast<std::ptrdiff_t>((top + r) * width + left));
    }
    if (scale) *scale = 1.0;
    return image;
  }
  // Box filter: output column j averages source span [j*s, (j+1)*s).
  const double s = static_cast<double>(line_width) / static_cast<double>(width);
  for (std::size_t j = 0; j < width; ++j) {
    const double lo = static_cast<double>(j) * s, hi = lo + s;
    for (std::size_t r = 0; r < kGlyphRows; ++r) {
      double acc = 0.0;
      for (auto c = static_cast<std::size_t>(lo); c < line_width && static_cast<double>(c) < hi; ++c) {
        const double overlap = std::min(hi, static_cast<double>(c + 1)) - std::max(lo, static_cast<double>(c));
        acc += overlap * line[r * line_width + c];
      }
      image[(top + r) * width + j] = std::min(intensity, acc / s);
    }
  }
  if (scale) *scale = 1.0 / s;
  return image;
}

std::vector<double> rotate_image(const std::vector<double>& image, std::size_t height, std::size_t width,
                                 double degrees) {
  if (image.size() != height * width) throw DimensionError("rotate_image: pixel count does not match geometry");
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cy = (static_cast<double>(height) - 1.0) / 2.0, cx = (static_cast<double>(width) - 1.0) / 2.0;
  auto pixel = [&](long y, long x) {
    if (y < 0 || x < 0 || y >= static_cast<long>(height) || x >= static_cast<long>(width)) return 0.0;
    return image[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
  };
  std::vector<double> out(image.size(), 0.0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      // Inverse map the destination pixel into the source.
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      const double sx = c * dx + s * dy + cx, sy = -s * dx + c * dy + cy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const double ax = sx - fx, ay = sy - fy;
      const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
      out[y * width + x] = (1 - ay) * ((1 - ax) * pixel(y0, x0) + ax * pixel(y0, x0 + 1)) +
                           ay * ((1 - ax) * pixel(y0 + 1, x0) + ax * pixel(y0 + 1, x0 + 1));
    }
  }
  return out;
}

SyntheticSample render_sample(const std::string& text, std::size_t index, const SynthSpec& spec) {
  SyntheticSample sample;
  sample.text = text;
  sample.image = render_text(text, spec.height, spec.width, spec.intensity, &sample.info.scale);
  std::mt19937_64 rng(mix_seed(mix_seed(spec.seed, index), 2));
  if (spec.noise.max_rotation_deg > 0.0) {
    std::uniform_real_distribution<double> angle(-spec.noise.max_rotation_deg, spec.noise.max_rotation_deg);
    sample.info.rotation_deg = angle(rng);
    sample.image = rotate_image(sample.image, spec.height, spec.width, sample.info.rotation_deg);
  }
  if (spec.noise.sigma > 0.0) {
    sample.info.noise_sigma = spec.noise.sigma;
    std::normal_distribution<double> noise(0.0, spec.noise.sigma);
    for (double& v : sample.image) v = std::clamp(v + noise(rng), 0.0, 1.0);
  }
  return sample;
}

std::vector<SyntheticSample> synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<SyntheticSample> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    std::mt19937_64 rng(mix_seed(mix_seed(spec.seed, i), 1));
    std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);
    std::uniform_int_distribution<std::size_t> pick(0, spec.alphabet.size() - 1);
    std::string text(length(rng), ' ');
    for (char& c : text) c = spec.alphabet[pick(rng)];
    out.push_back(render_sample(text, i, spec));
  }
  return out;
}

}  // namespace otsnet
