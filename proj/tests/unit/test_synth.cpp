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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "otsnet/errors.hpp"
#include "otsnet/image_io.hpp"
#include "otsnet/synth.hpp"
#include "otsnet/vocab.hpp"

using namespace otsnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "otsnet_test_synth";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("default alphabet covers printable ASCII except the space") {
  const std::string a = default_alphabet();
  CHECK(a.size() == 94);
  CHECK(a.find(' ') == std::string::npos);
  for (char c : a) CHECK(CharVocab::contains(c));
  CHECK(glyph_columns(' ') == std::array<std::uint8_t, 5>{0, 0, 0, 0, 0});
  for (char c : a) {
    bool lit = false;
    for (auto col : glyph_columns(c)) lit = lit || col != 0;
    CHECK(lit);
  }
}

TEST_CASE("same seed gives bit-identical corpora; sample i depends only on (seed, i)") {
  SynthSpec spec;
  spec.count = 50;
  spec.seed = 17;
  spec.noise = {0.1, 10.0};
  const auto a = synth_generate(spec), b = synth_generate(spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].text == b[i].text);
    CHECK(a[i].image == b[i].image);
  }
  SynthSpec shorter = spec;
  shorter.count = 20;
  const auto c = synth_generate(shorter);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].image == a[i].image);
  spec.seed = 18;
  CHECK(synth_generate(spec)[0].image != a[0].image);
}

TEST_CASE("clean rasters hold exactly the background and glyph intensity") {
  SynthSpec spec;
  spec.count = 200;
  spec.intensity = 0.8;
  for (const auto& s : synth_generate(spec)) {
    CHECK(s.image.size() == 8 * 32);
    CHECK(s.info.scale == 1.0);
    bool lit = false;
    for (double v : s.image) {
      CHECK((v == 0.0 || v == 0.8));
      lit = lit || v > 0.0;
    }
    CHECK(lit);
    CHECK(!s.text.empty());
    CHECK(s.text.size() <= 5);
  }
}

TEST_CASE("length histogram over 1..8 matches the uniform distribution within 3 sigma") {
  SynthSpec spec;
  spec.count = 1000;
  spec.seed = 4;
  spec.min_length = 1;
  spec.max_length = 8;
  std::map<std::size_t, std::size_t> hist;
  for (const auto& s : synth_generate(spec)) {
    ++hist[s.text.size()];
    for (double v : s.image) CHECK((v >= 0.0 && v <= 1.0));
  }
  const double p = 1.0 / 8.0, n = 1000.0, sigma = std::sqrt(n * p * (1.0 - p));
  for (std::size_t len = 1; len <= 8; ++len) {
    INFO("length " << len);
    CHECK(std::abs(static_cast<double>(hist[len]) - n * p) <= 3.0 * sigma);
  }
}

TEST_CASE("strings that do not fit the raster are rejected") {
  SynthSpec spec;
  spec.max_length = 9;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(synth_generate(spec), ConfigError);
  CHECK_THROWS_AS(render_text("abcdefghi", 8, 32, 1.0), ContractError);
  CHECK_THROWS_AS(render_text("", 8, 32, 1.0), ContractError);
  SynthSpec bad;
  bad.alphabet = "ab\n";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("render_text centres the glyph cells") {
  const auto img = render_text("I", 8, 32, 1.0);
  double left = 0.0, right = 0.0;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 32; ++c) (c < 16 ? left : right) += img[r * 32 + c];
  CHECK(left > 0.0);
  CHECK(right > 0.0);
  double scale = 0.0;
  render_text("abcdefgh", 8, 32, 1.0, &scale);
  CHECK(scale < 1.0);
}

TEST_CASE("rotate_image: zero degrees is the identity, 180 twice is the identity") {
  const auto img = render_text("ab", 8, 32, 1.0);
  CHECK(rotate_image(img, 8, 32, 0.0) == img);
  const auto back = rotate_image(rotate_image(img, 8, 32, 180.0), 8, 32, 180.0);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back[i] == doctest::Approx(img[i]).epsilon(1e-9).scale(1.0));
  CHECK_THROWS_AS(rotate_image(img, 8, 31, 5.0), DimensionError);
}

TEST_CASE("graymap I/O: binary round trip, plain format, corrupt files") {
  GrayImage img{2, 3, {0.0, 1.0, 0.5, 0.25, 0.75, 1.0}};
  const fs::path bin = scratch("rt.pgm");
  write_pgm(bin, img);
  const GrayImage back = read_pgm(bin);
  CHECK(back.height == 2);
  CHECK(back.width == 3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5 / 255.0 + 1e-12);

  const fs::path plain = scratch("plain.pgm");
  {
    std::ofstream out(plain);
    out << "P2\n# comment\n2 2\n10\n0 10\n5 10\n";
  }
  const GrayImage p = read_pgm(plain);
  CHECK(p.pixels == std::vector<double>{0.0, 1.0, 0.5, 1.0});

  const fs::path broken = scratch("broken.pgm");
  {
    std::ofstream out(broken, std::ios::binary);
    out << "P5\n4 4\n255\nxy";
  }
  CHECK_THROWS_AS(read_pgm(broken), ContractError);
  {
    std::ofstream out(broken, std::ios::binary);
    out << "GIF89a";
  }
  CHECK_THROWS_AS(read_pgm(broken), ContractError);
  CHECK_THROWS_AS(read_pgm(scratch("absent.pgm")), ContractError);
}

TEST_CASE("write_pgm_normalized stretches to the full range") {
  const fs::path path = scratch("norm.pgm");
  write_pgm_normalized(path, 1, 3, {2.0, 3.0, 4.0});
  CHECK(read_pgm(path).pixels == std::vector<double>{0.0, 128.0 / 255.0, 1.0});
  write_pgm_normalized(path, 1, 2, {5.0, 5.0});
  CHECK(read_pgm(path).pixels == std::vector<double>{0.0, 0.0});
}

TEST_CASE("resize_bilinear: identity on matching geometry, constant stays constant") {
  GrayImage img{2, 2, {0.1, 0.2, 0.3, 0.4}};
  CHECK(resize_bilinear(img, 2, 2).pixels == img.pixels);
  GrayImage flat{3, 5, std::vector<double>(15, 0.6)};
  for (double v : resize_bilinear(flat, 8, 32).pixels) CHECK(v == doctest::Approx(0.6));
  const GrayImage up = resize_bilinear(img, 4, 4);
  CHECK(up.pixels.size() == 16);
  CHECK(up.pixels.front() == doctest::Approx(0.1));
  CHECK(up.pixels.back() == doctest::Approx(0.4));
}
