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

// Acceptance suite: one PASS/FAIL line per criterion on stdout, supporting
// detail on stderr. Criteria 7, 8 and 10 drive the command-line binary given
// by --cli; the rest call the library directly.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "otsnet/attention.hpp"
#include "otsnet/commands.hpp"
#include "otsnet/config.hpp"
#include "otsnet/decoder.hpp"
#include "otsnet/gradcheck_suite.hpp"
#include "otsnet/image_io.hpp"
#include "otsnet/losses.hpp"
#include "otsnet/model.hpp"
#include "otsnet/ops.hpp"
#include "otsnet/synth.hpp"
#include "otsnet/thinking.hpp"
#include "otsnet/trainer.hpp"

using namespace otsnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  std::string cli;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Shell {
  int code = -1;
  std::string out;
};

// Runs a command line, capturing stdout; stderr goes to `log`.
Shell shell(const std::string& command, const fs::path& log) {
  Shell r;
  const std::string full = command + " 2>" + log.string();
  std::cerr << "  $ " << command << '\n';
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
  return path;
}

// Value of "key=<number>" inside the first line starting with `prefix`.
double metric_from(const std::string& output, const std::string& prefix, const std::string& key) {
  std::istringstream in(output);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) != 0) continue;
    const auto at = line.find(key + "=");
    if (at == std::string::npos) break;
    return std::stod(line.substr(at + key.size() + 1));
  }
  return -1.0;
}

// ---------------------------------------------------------------------------

Outcome criterion1(const Context&) {
  Timer timer;
  std::ostringstream detail;
  bool all = true;
  std::set<std::string> seen;
  for (const auto& c : run_gradcheck_suite(ModelConfig{}, 0)) {
    double worst = 0.0;
    for (const auto& e : c.report.entries) worst = std::max(worst, e.max_rel_error);
    std::cerr << "  " << (c.report.passed ? "pass " : "fail ") << c.name << " max_rel_error=" << worst << '\n';
    all = all && c.report.passed;
    seen.insert(c.name);
  }
  const std::set<std::string> required{"mhsa_block", "dmha_block", "mhca", "sq_chain", "mmcv_layer", "end_to_end"};
  const bool complete = std::includes(seen.begin(), seen.end(), required.begin(), required.end());
  const double secs = timer.seconds();
  detail << seen.size() << " checks, " << fmt(secs) << " s";
  return {all && complete && secs <= 300.0, detail.str()};
}

Outcome criterion2(const Context&) {
  std::size_t instances = 0;
  double worst_det = 0.0, worst_gumbel = 0.0;
  bool mask_ok = true;
  HeadConfig heads{16, 4, 0.05};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    {
      ParameterStore store;
      DualQkHeadParams p = DualQkHeadParams::create(store, "h", 16, 4);
      store.initialize(seed);
      oracle::perturb(store, seed + 7, 0.3);
      Tensor x = oracle::random_tensor({1, 3 + seed % 5, 16}, rng);
      const auto ref = oracle::dual_qk(oracle::of(x, 0), p, heads.lambda_init);
      worst_det = std::max(worst_det, oracle::max_abs_diff(oracle::of(dual_qk_attention(x, p, heads.lambda_init), 0),
                                                           ref.out));
    }
    {
      ParameterStore store;
      DmhaParams p = DmhaParams::create(store, "d", heads, 32);
      store.initialize(seed);
      oracle::perturb(store, seed + 11, 0.2);
      Tensor x = oracle::random_tensor({1, 2 + seed % 6, 16}, rng);
      worst_det = std::max(worst_det, oracle::max_abs_diff(oracle::of(dmha_block(x, p, heads), 0),
                                                           oracle::dmha_block(oracle::of(x, 0), p, heads)));
    }
    {
      Tensor e = oracle::random_tensor({7, 5}, rng);
      Tensor dist = softmax_lastdim(oracle::random_tensor({1, 4, 7}, rng, 2.0));
      worst_det = std::max(worst_det, oracle::max_abs_diff(oracle::of(codebook_embed(dist, e), 0),
                                                           oracle::codebook_embed(oracle::of(dist, 0), oracle::of(e))));
    }
    {
      std::uniform_int_distribution<std::size_t> nd(1, 64), td(1, 25);
      const std::size_t n = nd(rng), t = td(rng);
      mask_ok = mask_ok && build_mask(n, t).allowed == oracle::cross_mask(n, t);
    }
    {
      Tensor q = oracle::random_tensor({1, 5, 11}, rng, 2.0);
      Tensor g = gumbel_noise({1, 5, 11}, GumbelKey{seed, 3});
      const double tau = 0.1 + 0.05 * static_cast<double>(seed);
      worst_gumbel = std::max(worst_gumbel, oracle::max_abs_diff(oracle::of(gumbel_softmax(q, tau, g), 0),
                                                                 oracle::gumbel_softmax(oracle::of(q, 0), oracle::of(g, 0), tau)));
    }
    ++instances;
  }
  return {worst_det <= 1e-10 && worst_gumbel <= 1e-6 && mask_ok,
          std::to_string(instances) + " instances per operation, max deterministic error " + fmt(worst_det) +
              ", gumbel error " + fmt(worst_gumbel) + ", masks " + (mask_ok ? "exact" : "differ")};
}

Outcome criterion3(const Context&) {
  double worst = 0.0;
  std::size_t maps = 0;
  for (double lambda_init : {0.05, 0.10, 0.15}) {
    HeadConfig heads{64, 16, lambda_init};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ParameterStore store;
      DmhaParams p = DmhaParams::create(store, "d", heads, 128);
      store.initialize(seed);
      oracle::perturb(store, seed + 100, 0.2);
      std::mt19937_64 rng(seed);
      AttentionSink sink;
      dmha_block(oracle::random_tensor({2, 16, 64}, rng), p, heads, &sink, 0);
      for (const auto& rec : sink) {
        if (rec.kind != AttentionKind::kDmhaDiff) continue;
        ++maps;
        for (std::size_t i = 0; i < rec.rows; ++i) {
          long double s = 0.0L;
          for (std::size_t j = 0; j < rec.cols; ++j) s += rec.map[i * rec.cols + j];
          worst = std::max(worst, static_cast<double>(std::fabs(s - (1.0L - rec.lambda))));
        }
      }
    }
  }
  return {maps == 3 * 20 * 2 * 2 && worst <= 1e-6,
          std::to_string(maps) + " differential maps, max row-sum deviation " + fmt(worst)};
}

Outcome criterion4(const Context&) {
  bool ok = true;
  std::ostringstream detail;
  for (double lambda_init : {0.05, 0.10, 0.15}) {
    const std::vector<double> zero(16, 0.0);
    const double scalar = lambda_value(zero, zero, zero, zero, lambda_init);
    const Tensor z = Tensor::zeros({16});
    const double tensor = lambda_value(z, z, z, z, lambda_init).item();
    ok = ok && scalar == lambda_init && tensor == lambda_init;
    detail << lambda_init << "->" << scalar << ' ';
  }
  return {ok, detail.str()};
}

Outcome criterion5(const Context&) {
  double worst = 0.0;
  std::mt19937_64 rng(5);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Tensor q = oracle::random_tensor({2, 4, 10}, rng, 2.0);
    Tensor g = gumbel_noise({2, 4, 10}, GumbelKey{trial, 0});
    const auto soft = oracle::vec(gumbel_softmax(q, 1e-6, g));
    const auto qv = oracle::vec(q), gv = oracle::vec(g);
    for (std::size_t r = 0; r < 8; ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < 10; ++c)
        if (qv[r * 10 + c] + gv[r * 10 + c] > qv[r * 10 + best] + gv[r * 10 + best]) best = c;
      for (std::size_t c = 0; c < 10; ++c) worst = std::max(worst, std::fabs(soft[r * 10 + c] - (c == best ? 1.0 : 0.0)));
    }
  }

  const std::vector<double> logits{1.0, 0.0, -0.5, 2.0, 0.3};
  const std::size_t classes = logits.size(), draws = 100000;
  std::vector<double> tiled;
  for (std::size_t i = 0; i < draws; ++i) tiled.insert(tiled.end(), logits.begin(), logits.end());
  const Tensor q = Tensor::from({1, draws, classes}, tiled);
  const auto picks = hard_quantize(add(q, gumbel_noise(q.shape(), GumbelKey{2024, 0})));
  std::vector<double> counts(classes, 0.0);
  for (int k : picks) counts[static_cast<std::size_t>(k)] += 1.0;
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  double worst_se = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double p = std::exp(logits[c]) / z;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
    worst_se = std::max(worst_se, std::fabs(counts[c] / static_cast<double>(draws) - p) / se);
  }
  return {worst <= 1e-6 && worst_se <= 3.0,
          "tau=1e-6 max deviation " + fmt(worst) + ", frequency deviation " + fmt(worst_se) + " standard errors"};
}

Outcome criterion6(const Context&) {
  const std::size_t n = 16, t = 8;
  ModelConfig mc;
  const DecoderConfig cfg{mc.decoder_depth, mc.model_dim, mc.head_dim, t, mc.mlp_hidden()};
  ParameterStore store;
  DecoderParams params = DecoderParams::create(store, "mmcv", cfg);
  store.initialize(6);
  oracle::perturb(store, 7, 0.05);
  std::mt19937_64 rng(8);
  const Tensor fv = oracle::random_tensor({1, n, mc.model_dim}, rng);
  const Tensor fq = oracle::random_tensor({1, t, mc.model_dim}, rng);
  const std::string label = "a7Kq!x2Z";
  auto input_of = [&](const std::string& text) {
    std::vector<int> ids{CharVocab::kBos};
    for (std::size_t i = 0; i + 1 < t; ++i) ids.push_back(CharVocab::id_of(text[i]));
    return ids;
  };
  const std::size_t vocab = CharVocab::kSize;
  const auto base = oracle::vec(decode_train(build_fusion(fv, fq), input_of(label), t, params, cfg));
  auto changed = [&](const std::vector<double>& other) {
    std::vector<bool> rows(t, false);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t c = 0; c < vocab; ++c) rows[i] = rows[i] || other[i * vocab + c] != base[i * vocab + c];
    return rows;
  };
  std::size_t violations = 0;
  for (std::size_t k = 0; k < t; ++k) {
    std::string perturbed = label;
    perturbed[k] = perturbed[k] == 'm' ? 'n' : 'm';
    const auto rows = changed(oracle::vec(decode_train(build_fusion(fv, fq), input_of(perturbed), t, params, cfg)));
    // Character k enters the decoder at input position k + 1.
    for (std::size_t i = 0; i < t; ++i) violations += rows[i] != (i > k);

    std::vector<double> q(fq.data().begin(), fq.data().end());
    for (std::size_t c = 0; c < mc.model_dim; ++c) q[k * mc.model_dim + c] += 0.25;
    const auto srows = changed(oracle::vec(decode_train(build_fusion(fv, Tensor::from(fq.shape(), q)), input_of(label),
                                                        t, params, cfg)));
    for (std::size_t i = 0; i < t; ++i) violations += srows[i] != (i >= k);
  }
  return {violations == 0, "T=8 N=16, " + std::to_string(violations) + " positions outside the expected pattern"};
}

// Shared by criteria 7 and 10: tiny corpora trained through the CLI.
std::string base_config(const fs::path& dir, const std::string& extra) {
  return "paths.checkpoint_dir = " + (dir / "checkpoint").string() + "\npaths.log_file = " +
         (dir / "train_log.csv").string() + "\npaths.export_dir = " + (dir / "exports").string() + "\n" + extra;
}

Outcome criterion7(const Context& ctx) {
  const fs::path dir = ctx.work / "overfit";
  fs::remove_all(dir);
  // 250 samples with a 20% held-out tail leaves 200 training samples.
  const fs::path cfg_path = write_file(
      dir / "overfit.cfg",
      base_config(dir, "data.count = 250\ndata.heldout_fraction = 0.2\ndata.seed = 7\ntrain.seed = 7\n"
                       "train.learning_rate = 1e-3\ntrain.epochs = 60\n"));
  Timer timer;
  const Shell train = shell(ctx.cli + " train --config " + quote(cfg_path), dir / "train.err");
  const double secs = timer.seconds();
  const double acc = metric_from(train.out, "train ", "sequence_accuracy");
  const double count = metric_from(train.out, "train ", "count");
  if (train.code != 0) return {false, "train exited with " + std::to_string(train.code)};

  const RunConfig cfg = load_config(cfg_path);
  const auto samples = load_dataset(cfg, "train");
  const fs::path images = dir / "images";
  fs::create_directories(images);
  std::map<std::string, std::string> expected;
  for (std::size_t i = 0; i < 20 && i < samples.size(); ++i) {
    const fs::path file = images / ("sample" + std::to_string(100 + i) + ".pgm");
    write_pgm(file, GrayImage{cfg.model.image_height, cfg.model.image_width,
                              render_text(samples[i].text, cfg.model.image_height, cfg.model.image_width, 1.0)});
    expected[file.string()] = samples[i].text;
  }
  const Shell infer = shell(ctx.cli + " infer --config " + quote(cfg_path) + " " + quote(images), dir / "infer.err");
  std::size_t exact = 0, lines = 0;
  std::istringstream in(infer.out);
  for (std::string line; std::getline(in, line);) {
    const auto t1 = line.find('\t'), t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) continue;
    ++lines;
    const auto it = expected.find(line.substr(0, t1));
    if (it != expected.end() && line.substr(t1 + 1, t2 - t1 - 1) == it->second) ++exact;
    else std::cerr << "  mismatch: " << line << '\n';
  }
  const bool pass = infer.code == 0 && count == 200.0 && acc >= 0.99 && secs <= 600.0 && exact == 20 && lines == 20;
  return {pass, "train accuracy " + fmt(acc, 4) + " on " + fmt(count, 4) + " samples in " + fmt(secs) + " s, " +
                    std::to_string(exact) + "/20 re-rendered strings recognized"};
}

Outcome criterion8(const Context& ctx) {
  const fs::path dir = ctx.work / "ablation";
  fs::remove_all(dir);
  const fs::path cfg_path =
      write_file(dir / "dame.cfg", base_config(dir, "data.count = 2000\ndata.heldout_fraction = 0.2\nablation.seeds = 3\n"));
  Timer timer;
  const Shell r = shell(ctx.cli + " ablate --suite dame --config " + quote(cfg_path) + " --out " + quote(dir / "table"),
                        dir / "ablate.err");
  std::cerr << r.out;
  if (r.code != 0) return {false, "ablate exited with " + std::to_string(r.code)};
  std::map<std::string, double> median;
  std::istringstream table(slurp(dir / "table" / "ablation_dame.csv"));
  std::string line;
  std::getline(table, line);
  while (std::getline(table, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() >= 3) median[cells[1]] = std::stod(cells[2]);
  }
  if (median.size() != 3 || !median.count("vit") || !median.count("dmha_only") || !median.count("dame")) {
    return {false, "ablation table does not hold the three encoder rows"};
  }
  const double dame = median["dame"], dmha = median["dmha_only"], vit = median["vit"];
  const bool pass = dame >= dmha - 0.01 && dame >= std::max(vit, dmha) - 0.02;
  return {pass, "median held-out sequence accuracy vit " + fmt(vit, 4) + ", dmha_only " + fmt(dmha, 4) + ", dame " +
                    fmt(dame, 4) + " (" + fmt(timer.seconds() / 60.0) + " min)"};
}

Outcome criterion9(const Context&) {
  ModelConfig mc;
  OtsNet model(mc);
  model.initialize(9);
  SynthSpec spec;
  spec.count = 8;
  spec.seed = 9;
  const auto samples = synth_generate(spec);
  std::vector<const std::vector<double>*> images;
  std::vector<std::string> texts;
  for (const auto& s : samples) {
    images.push_back(&s.image);
    texts.push_back(s.text);
  }
  const LabelBatch labels = LabelBatch::frame(texts, frame_length(texts, mc.slots));
  ForwardOptions options;
  options.noise = GumbelKey{9, 0};
  const ForwardResult out = model.forward(stack_images(images, mc.image_height, mc.image_width), labels, options);
  const double base = loss_total(out.logits, out.sq_logits, labels, 0.0).total.item();
  std::ostringstream detail;
  bool all = true;
  for (double a : {0.2, 0.3, 0.4}) {
    const LossTerms terms = loss_total(out.logits, out.sq_logits, labels, a);
    const double lhs = terms.total.item() - base;
    const double rhs = a * terms.sq;
    const bool exact = lhs == rhs;
    all = all && exact;
    detail << "a=" << a << (exact ? " exact" : " off by " + fmt(std::fabs(lhs - rhs) / std::ldexp(1.0, std::ilogb(terms.total.item()) - 52), 2) + " ulp") << "; ";
  }
  return {all, detail.str()};
}

Outcome criterion10(const Context& ctx) {
  std::vector<std::string> logs, manifests, blobs;
  for (const char* run : {"run_a", "run_b"}) {
    const fs::path dir = ctx.work / "repro" / run;
    fs::remove_all(dir);
    const fs::path cfg =
        write_file(dir / "repro.cfg", base_config(dir, "data.count = 120\ntrain.epochs = 2\ntrain.augment = true\n"));
    const Shell r = shell(ctx.cli + " train --seed 11 --config " + quote(cfg), dir / "train.err");
    if (r.code != 0) return {false, std::string(run) + " exited with " + std::to_string(r.code)};
    logs.push_back(slurp(dir / "train_log.csv"));
    manifests.push_back(slurp(dir / "checkpoint" / "manifest.txt"));
    blobs.push_back(slurp(dir / "checkpoint" / "params.bin"));
  }
  const std::size_t steps = static_cast<std::size_t>(std::count(logs[0].begin(), logs[0].end(), '\n'));
  const bool pass = steps > 1 && logs[0] == logs[1] && manifests[0] == manifests[1] && blobs[0] == blobs[1] &&
                    !blobs[0].empty();
  return {pass, std::to_string(steps - 1) + " logged steps, " + std::to_string(blobs[0].size()) + " checkpoint bytes, " +
                    (pass ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  Context ctx;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory");
  app.add_option("--cli", ctx.cli, "path to the otsnet binary")->required();
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  ctx.work = fs::absolute(work);
  ctx.cli = "'" + fs::absolute(ctx.cli).string() + "'";
  fs::create_directories(ctx.work);

  const std::vector<std::pair<const char*, std::function<Outcome(const Context&)>>> criteria{
      {"gradient correctness", criterion1},
      {"reference oracles", criterion2},
      {"differential row-sum law", criterion3},
      {"lambda identity at init", criterion4},
      {"gumbel-softmax limit and sampling", criterion5},
      {"mask causality", criterion6},
      {"overfit sanity", criterion7},
      {"directional encoder ablation", criterion8},
      {"alpha loss ledger", criterion9},
      {"reproducibility", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    std::cerr << "criterion " << number << ": " << criteria[i].first << '\n';
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
