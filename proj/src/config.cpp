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

#include "otsnet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "otsnet/errors.hpp"

namespace otsnet {
namespace {

struct Binding {
  std::string key;
  std::string doc;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

std::string format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + text + "'");
}

template <typename T>
Binding number(const std::string& key, T& field, const std::string& doc) {
  return {key, doc,
          [&field] {
            if constexpr (std::is_floating_point_v<T>) {
              return format(field);
            } else {
              return std::to_string(field);
            }
          },
          [&field, key](const std::string& v) { field = parse_number<T>(key, v); }};
}

Binding flag(const std::string& key, bool& field, const std::string& doc) {
  return {key, doc, [&field] { return std::string(field ? "true" : "false"); },
          [&field, key](const std::string& v) { field = parse_bool(key, v); }};
}

Binding text(const std::string& key, std::string& field, const std::string& doc) {
  return {key, doc, [&field] { return field; }, [&field](const std::string& v) { field = v; }};
}

std::vector<Binding> bindings(RunConfig& c) {
  auto& m = c.model;
  auto& t = c.train;
  auto& d = c.data;
  auto& p = c.paths;
  return {
      number("model.image_height", m.image_height, "input raster height"),
      number("model.image_width", m.image_width, "input raster width"),
      number("model.channels", m.channels, "input channels"),
      number("model.patch_height", m.patch_height, "patch height"),
      number("model.patch_width", m.patch_width, "patch width"),
      number("model.dim", m.model_dim, "model width D"),
      number("model.head_dim", m.head_dim, "per-head width d"),
      number("model.mlp_ratio", m.mlp_ratio, "feed-forward hidden width as a multiple of D"),
      number("model.lambda_init", m.lambda_init, "differential attention lambda_init"),
      {"model.encoder", "encoder variant: vit, dmha_only or dame",
       [&m] { return std::string(encoder_variant_name(m.encoder)); },
       [&m](const std::string& v) { m.encoder = parse_encoder_variant(v); }},
      number("model.encoder_depth", m.encoder_depth, "encoder layer count"),
      flag("model.macaron_ffn", m.macaron_ffn, "half-step feed-forward around each encoder layer"),
      number("model.slots", m.slots, "character slots T (also the decode limit)"),
      number("model.codebook_size", m.codebook_size, "semantic units C"),
      number("model.decoder_depth", m.decoder_depth, "decoder layer count"),
      flag("model.use_pam", m.use_pam, "enable slot alignment"),
      flag("model.use_mmcv", m.use_mmcv, "enable the autoregressive decoder"),
      {"model.sq_mode", "quantizer: none, normal, detach or gumbel",
       [&m] { return std::string(sq_mode_name(m.sq_mode)); },
       [&m](const std::string& v) { m.sq_mode = parse_sq_mode(v); }},
      flag("model.sq_logits_without_quantizer", m.sq_logits_without_quantizer,
           "keep the slot classifier for the auxiliary loss when sq_mode is none"),
      number("train.alpha", t.alpha, "weight of the quantizer loss"),
      number("train.batch_size", t.batch_size, "samples per step"),
      number("train.learning_rate", t.learning_rate, "peak learning rate"),
      number("train.weight_decay", t.weight_decay, "decoupled weight decay"),
      number("train.warmup_fraction", t.warmup_fraction, "fraction of steps spent in linear warmup"),
      number("train.epochs", t.epochs, "passes over the training split"),
      number("train.seed", t.seed, "seed for initialization, shuffling and noise"),
      number("train.tau_start", t.temperature.start, "initial Gumbel temperature"),
      number("train.tau_end", t.temperature.end, "final Gumbel temperature"),
      number("train.tau_decay", t.temperature.decay, "per-step temperature factor; 0 reaches tau_end at the last step"),
      flag("train.augment", t.augment, "random rotation and noise each epoch"),
      number("train.augment_rotation_deg", t.augment_rotation_deg, "augmentation rotation bound in degrees"),
      number("train.augment_noise", t.augment_noise, "augmentation noise sigma"),
      number("train.clip_norm", t.clip_norm, "global gradient norm limit; 0 disables"),
      text("data.source", d.source, "synth or directory"),
      number("data.count", d.synth.count, "synthetic corpus size"),
      number("data.seed", d.synth.seed, "synthetic corpus seed"),
      text("data.alphabet", d.synth.alphabet, "characters drawn for synthetic strings"),
      number("data.min_length", d.synth.min_length, "shortest synthetic string"),
      number("data.max_length", d.synth.max_length, "longest synthetic string"),
      number("data.noise_sigma", d.synth.noise.sigma, "synthetic pixel noise sigma"),
      number("data.rotation_deg", d.synth.noise.max_rotation_deg, "synthetic rotation bound in degrees"),
      text("data.directory", d.directory, "graymap directory with labels.tsv"),
      number("data.heldout_fraction", d.heldout_fraction, "tail fraction of the corpus held out"),
      text("data.eval_split", d.eval_split, "split read by eval: train, heldout or all"),
      text("paths.checkpoint_dir", p.checkpoint_dir, "checkpoint directory"),
      text("paths.export_dir", p.export_dir, "export directory"),
      text("paths.log_file", p.log_file, "training log"),
      number("paths.checkpoint_every", p.checkpoint_every, "epochs between periodic checkpoints; 0 = final only"),
      number("ablation.seeds", c.ablation.seeds, "seeds per ablation variant"),
      number("eval.batch_size", c.eval_batch, "recognition batch size"),
  };
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (data.source != "synth" && data.source != "directory") {
    throw ConfigError("key 'data.source': expected synth or directory, got '" + data.source + "'");
  }
  if (data.source == "synth") {
    data.synth.validate();
    if (data.synth.height != model.image_height || data.synth.width != model.image_width) {
      throw ConfigError("synthetic raster geometry must match the model input");
    }
    if (data.synth.max_length > model.slots) throw ConfigError("synthetic strings longer than the slot count");
  } else if (data.directory.empty()) {
    throw ConfigError("key 'data.directory' is required when data.source = directory");
  }
  if (!(data.heldout_fraction >= 0.0 && data.heldout_fraction < 1.0)) {
    throw ConfigError("key 'data.heldout_fraction' must lie in [0, 1)");
  }
  if (data.eval_split != "train" && data.eval_split != "heldout" && data.eval_split != "all") {
    throw ConfigError("key 'data.eval_split': expected train, heldout or all");
  }
  if (ablation.seeds == 0) throw ConfigError("key 'ablation.seeds' must be positive");
  if (eval_batch == 0) throw ConfigError("key 'eval.batch_size' must be positive");
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (auto& b : bindings(cfg)) {
    if (b.key == key) {
      b.set(value);
      // Synthetic rasters always follow the model geometry.
      cfg.data.synth.height = cfg.model.image_height;
      cfg.data.synth.width = cfg.model.image_width;
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t number_of_line = 0;
  while (std::getline(in, line)) {
    ++number_of_line;
    // Only whole-line comments: values such as the alphabet may contain '#'.
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number_of_line) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError("key '" + key + "' given twice");
    set_config_value(cfg, key, trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in);
}

std::vector<ConfigEntry> describe_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::vector<ConfigEntry> out;
  for (auto& b : bindings(copy)) out.push_back({b.key, b.get(), b.doc});
  return out;
}

void write_config(std::ostream& out, const RunConfig& cfg, const std::string& prefix) {
  for (const auto& e : describe_config(cfg)) out << prefix << e.key << " = " << e.value << '\n';
}

}  // namespace otsnet
