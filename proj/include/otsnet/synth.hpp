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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace otsnet {

/// Printable ASCII without the space, which is invisible at string ends.
std::string default_alphabet();

/// Five column bytes for a printable ASCII glyph; bit r of a byte lights
/// row r (top row is bit 0) of a 5x7 cell.
const std::array<std::uint8_t, 5>& glyph_columns(char c);

struct NoiseSpec {
  double sigma = 0.0;             // additive Gaussian noise, clamped to [0, 1] afterwards
  double max_rotation_deg = 0.0;  // uniform in [-max, max]; 0 disables rotation
};

struct SynthSpec {
  std::size_t count = 2000;
  std::uint64_t seed = 0;
  std::string alphabet = default_alphabet();
  std::size_t min_length = 1;
  std::size_t max_length = 5;
  NoiseSpec noise;
  std::size_t height = 8;
  std::size_t width = 32;
  double intensity = 1.0;

  void validate() const;
};

struct RenderInfo {
  double scale = 1.0;  // horizontal compression applied to fit the raster
  double noise_sigma = 0.0;
  double rotation_deg = 0.0;
};

struct SyntheticSample {
  std::vector<double> image;  // height * width, row-major, values in [0, 1]
  std::string text;
  RenderInfo info;
};

/// Longest string that fits a raster of the given width.
inline std::size_t max_text_length(std::size_t width) { return width / 4; }

/// Draws `text` centred on a clean raster. Each character takes a six-pixel
/// cell; a line wider than the raster is box-filtered down to it.
std::vector<double> render_text(const std::string& text, std::size_t height, std::size_t width, double intensity,
                                double* scale = nullptr);

/// Renders sample `index` of a corpus: the text is drawn, then rotated and
/// noised from a stream derived from (seed, index).
SyntheticSample render_sample(const std::string& text, std::size_t index, const SynthSpec& spec);

/// A corpus of random strings; sample i depends only on (seed, i).
std::vector<SyntheticSample> synth_generate(const SynthSpec& spec);

/// Bilinear rotation about the raster centre with zero fill.
std::vector<double> rotate_image(const std::vector<double>& image, std::size_t height, std::size_t width,
                                 double degrees);

}  // namespace otsnet
