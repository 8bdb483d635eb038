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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "otsnet/commands.hpp"
#include "otsnet/image_io.hpp"
#include "otsnet/synth.hpp"

using namespace otsnet;
namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "otsnet_test_commands";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_config(const std::string& name, const std::string& extra = "") {
  const fs::path path = root() / (name + ".cfg");
  std::ofstream out(path);
  out << "model.dim = 16\nmodel.head_dim = 4\nmodel.encoder_depth = 5\nmodel.decoder_depth = 1\nmodel.slots = 6\n"
      << "train.epochs = 1\ntrain.batch_size = 8\ndata.count = 20\n"
      << "paths.checkpoint_dir = " << (root() / name / "ckpt").string() << '\n'
      << "paths.log_file = " << (root() / name / "log.csv").string() << '\n'
      << "paths.export_dir = " << (root() / name / "exports").string() << '\n'
      << extra;
  return path;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& command, const CommandOptions& options) {
  std::ostringstream out, err;
  const int code = run_command(command, options, out, err);
  return {code, out.str(), err.str()};
}

// A trained tiny model shared by the command tests.
const fs::path& trained_config() {
  static const fs::path cfg = [] {
    const fs::path path = write_config("base");
    CommandOptions o;
    o.config_path = path.string();
    const Run r = run("train", o);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return path;
  }();
  return cfg;
}

std::size_t count_lines(const std::string& s, const std::string& prefix = "") {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0 && !line.empty();
  return n;
}

}  // namespace

TEST_CASE("train: header echoes every effective value; log has one line per step") {
  const fs::path cfg = trained_config();
  CommandOptions o;
  o.config_path = cfg.string();
  o.out = (root() / "echo").string();
  const Run r = run("train", o);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# train.alpha = 0.3\n") != std::string::npos);
  CHECK(r.out.find("# model.lambda_init = 0.05\n") != std::string::npos);
  CHECK(r.out.find("# data.heldout_fraction = 0.2\n") != std::string::npos);
  CHECK(r.out.find("epoch 1 mean_loss") != std::string::npos);
  CHECK(r.out.find("train count=16") != std::string::npos);
  // 16 training samples in batches of 8: two steps plus the header.
  CHECK(count_lines(slurp(root() / "echo" / "train_log.csv")) == 3);
  CHECK(fs::exists(root() / "echo" / "checkpoint" / "manifest.txt"));
}

TEST_CASE("configuration failures exit with code 2") {
  CommandOptions o;
  o.config_path = (root() / "missing.cfg").string();
  CHECK(run("train", o).code == kExitConfig);
  o.config_path = write_config("badkey", "train.colour = 3\n").string();
  const Run r = run("train", o);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("train.colour") != std::string::npos);
  CHECK(run("frobnicate", CommandOptions{}).code == kExitConfig);
  CommandOptions ablate;
  ablate.suite = "nonsense";
  CHECK(run("ablate", ablate).code == kExitConfig);
  CHECK(run("ablate", CommandOptions{}).code == kExitConfig);
}

TEST_CASE("eval: deterministic output; empty dataset exits 2") {
  CommandOptions o;
  o.config_path = trained_config().string();
  const Run a = run("eval", o), b = run("eval", o);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("heldout count=4 sequence_accuracy=", 0) == 0);
  CHECK(a.out.find("  len=") != std::string::npos);

  CommandOptions empty;
  empty.config_path = write_config("empty", "data.heldout_fraction = 0\n").string();
  empty.checkpoint = (root() / "base" / "ckpt").string();
  CHECK(run("eval", empty).code == kExitConfig);
}

TEST_CASE("checkpoint problems exit with code 4 naming the tensor") {
  CommandOptions wide;
  wide.config_path = write_config("wide", "model.dim = 24\n").string();
  // The base file already sets model.dim; rewrite without the duplicate.
  {
    std::string text = slurp(wide.config_path);
    text.replace(text.find("model.dim = 16\n"), 15, "");
    std::ofstream(wide.config_path) << text;
  }
  wide.checkpoint = (root() / "base" / "ckpt").string();
  const Run r = run("eval", wide);
  CHECK(r.code == kExitCheckpoint);
  CHECK(r.err.find("encoder.") != std::string::npos);

  const fs::path corrupt = root() / "corrupt";
  fs::remove_all(corrupt);
  fs::copy(root() / "base" / "ckpt", corrupt);
  {
    std::ofstream blob(corrupt / "params.bin", std::ios::binary | std::ios::app);
    blob << 'x';
  }
  CommandOptions o;
  o.config_path = trained_config().string();
  o.checkpoint = corrupt.string();
  CHECK(run("eval", o).code == kExitCheckpoint);
  o.checkpoint = (root() / "nowhere").string();
  CHECK(run("eval", o).code == kExitCheckpoint);
}

TEST_CASE("infer: one record per decodable file, warnings for the rest") {
  const fs::path dir = root() / "images";
  fs::create_directories(dir);
  for (int i = 0; i < 9; ++i) {
    GrayImage img{8, 32, render_text(std::string(1, static_cast<char>('a' + i)), 8, 32, 1.0)};
    write_pgm(dir / ("img" + std::to_string(i) + ".pgm"), img);
  }
  std::ofstream(dir / "broken.pgm") << "not an image";
  CommandOptions o;
  o.config_path = trained_config().string();
  o.inputs = {dir.string()};
  const Run r = run("infer", o);
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 9);
  CHECK(count_lines(r.err, "warning:") == 1);
  CHECK(r.err.find("broken.pgm") != std::string::npos);
  CHECK(run("infer", o).out == r.out);

  const fs::path blank = root() / "blank.pgm";
  write_pgm(blank, GrayImage{16, 40, std::vector<double>(16 * 40, 0.0)});
  o.inputs = {blank.string()};
  const Run b = run("infer", o);
  CHECK(b.code == 0);
  CHECK(count_lines(b.out) == 1);

  o.inputs = {(dir / "broken.pgm").string()};
  CHECK(run("infer", o).code == kExitFailure);
}

TEST_CASE("dump-attention writes every head of every recorded layer") {
  const fs::path image = root() / "dump.pgm";
  write_pgm(image, GrayImage{8, 32, render_text("ab", 8, 32, 1.0)});
  CommandOptions o;
  o.config_path = trained_config().string();
  o.inputs = {image.string()};
  o.out = (root() / "maps").string();
  const Run r = run("dump-attention", o);
  REQUIRE(r.code == 0);
  // 3 MHSA layers x 4 heads, 2 DMHA layers x 2 heads x 3 maps, PAM 4 heads,
  // one decoder layer x 4 heads.
  const std::size_t expected = 3 * 4 + 2 * 2 * 3 + 4 + 1 * 4;
  CHECK(r.out.find("maps " + std::to_string(expected) + " ") != std::string::npos);
  std::size_t txt = 0, pgm = 0;
  for (const auto& e : fs::directory_iterator(root() / "maps")) {
    txt += e.path().extension() == ".txt";
    pgm += e.path().extension() == ".pgm";
  }
  CHECK(txt == expected);
  CHECK(pgm == expected);
}

TEST_CASE("export-features writes one row per label character") {
  CommandOptions o;
  o.config_path = trained_config().string();
  o.out = (root() / "features").string();
  const Run r = run("export-features", o);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(root() / "features" / "features.csv");
  CHECK(r.out.find("features " + std::to_string(count_lines(csv)) + " ") == 0);
  // label id plus 16 feature columns.
  const std::string first = csv.substr(0, csv.find('\n'));
  CHECK(std::count(first.begin(), first.end(), ',') == 16);
}

TEST_CASE("gradcheck command passes on a fresh model") {
  CommandOptions o;
  o.config_path = trained_config().string();
  const Run r = run("gradcheck", o);
  CHECK(r.code == 0);
  CHECK(count_lines(r.out, "PASS ") >= 6);
  CHECK(count_lines(r.out, "FAIL ") == 0);
}

TEST_CASE("worker count honours OTSNET_THREADS") {
  ::setenv("OTSNET_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  ::setenv("OTSNET_THREADS", "zero", 1);
  CHECK(worker_threads() == 1);
  ::unsetenv("OTSNET_THREADS");
  CHECK(worker_threads() == 1);
}
