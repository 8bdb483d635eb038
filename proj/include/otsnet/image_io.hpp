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

#include <filesystem>
#include <vector>

namespace otsnet {

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major, scaled to [0, 1]
};

/// Reads a binary (P5) or plain (P2) portable graymap with maxval <= 255.
/// Throws ContractError when the file is not a decodable graymap.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes pixels in [0, 1] as binary 8-bit graymap (rounded, clamped).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Min-max normalizes values to the full 8-bit range before writing. A
/// constant map is written as zeros.
void write_pgm_normalized(const std::filesystem::path& path, std::size_t height, std::size_t width,
                          const std::vector<double>& values);

/// Bilinear resampling with pixel-centre alignment. Identity when the
/// geometry already matches.
GrayImage resize_bilinear(const GrayImage& image, std::size_t height, std::size_t width);

}  // namespace otsnet
