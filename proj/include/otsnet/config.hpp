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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "otsnet/model.hpp"
#include "otsnet/synth.hpp"
#include "otsnet/trainer.hpp"

namespace otsnet {

struct DataConfig {
  // "synth" draws a corpus from `synth`; "directory" reads graymaps listed in
  // <dir>/labels.tsv as "file<TAB>text" lines.
  std::string source = "synth";
  SynthSpec synth;
  std::string directory;
  double heldout_fraction = 0.2;
  // Which part a command reads: train, heldout or all.
  std::string eval_split = "heldout";
};

struct PathConfig {
  std::string checkpoint_dir = "run/checkpoint";
  std::string export_dir = "run/exports";
  std::string log_file = "run/train_log.csv";
  std::size_t checkpoint_every = 0;  // epochs between periodic checkpoints; 0 = final only
};

struct AblationConfig {
  std::size_t seeds = 3;  // seed, seed+1, ...
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
  PathConfig paths;
  AblationConfig ablation;
  std::size_t eval_batch = 64;

  void validate() const;
};

/// Parses "key = value" lines; lines starting with '#' are comments. Unknown or repeated
/// keys and unparsable values raise ConfigError naming the key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one "key=value" assignment with the same checks as the parser.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Every key in canonical order with its effective value and description.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::string doc;
};
std::vector<ConfigEntry> describe_config(const RunConfig& cfg);

/// "key = value" for every key; the output parses back to the same config.
void write_config(std::ostream& out, const RunConfig& cfg, const std::string& prefix = "");

}  // namespace otsnet
