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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otsnet/config.hpp"
#include "otsnet/synth.hpp"

namespace otsnet {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // no usable input (e.g. every image failed to decode)
  kExitConfig = 2,      // invalid or missing configuration, empty dataset
  kExitNumeric = 3,     // non-finite loss or gradient
  kExitCheckpoint = 4,  // checkpoint missing, corrupt or mismatched
};

struct CommandOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::string> checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> suite;
  std::vector<std::string> inputs;  // image files or directories
};

/// Loads the config named by the options and applies --seed.
RunConfig resolve_config(const CommandOptions& options);

/// The corpus described by the data section: the synthetic corpus split
/// train/held-out, or a graymap directory (labels.tsv) read in full.
std::vector<SyntheticSample> load_dataset(const RunConfig& cfg, const std::string& split);

int cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_infer(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_dump_attention(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_export_features(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_ablate(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Dispatches by subcommand name; unknown names return kExitConfig.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Worker count for per-sample fan-out: OTSNET_THREADS when set, else 1.
std::size_t worker_threads();

}  // namespace otsnet
