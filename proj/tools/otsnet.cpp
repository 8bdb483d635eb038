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

// Command-line front end. Every subcommand shares the same flag set; see
// `otsnet <command> --help`.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "otsnet/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"OTSNet scene text recognizer"};
  app.require_subcommand(1);

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"train", "train a model and write checkpoints and the step log"},
      {"eval", "score a checkpoint on the configured dataset"},
      {"infer", "recognize graymap images (files or directories)"},
      {"dump-attention", "export every attention map for one image"},
      {"export-features", "write quantized slot features per label character"},
      {"gradcheck", "finite-difference check of every block and the full loss"},
      {"ablate", "train and compare the variants of an ablation suite"},
  };

  otsnet::CommandOptions options;
  std::string checkpoint, out, suite;
  std::uint64_t seed = 0;
  std::string chosen;
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--config", options.config_path, "key = value configuration file");
    sub->add_option("--checkpoint", checkpoint, "checkpoint directory");
    sub->add_option("--seed", seed, "overrides train.seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--suite", suite, "ablation suite: dame, modules, sq_variants, alpha, lambda");
    sub->add_option("inputs", options.inputs, "image files or directories");
    sub->callback([&chosen, sub] { chosen = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : otsnet::kExitConfig;
  }

  CLI::App* sub = app.get_subcommand(chosen);
  if (sub->count("--checkpoint")) options.checkpoint = checkpoint;
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--out")) options.out = out;
  if (sub->count("--suite")) options.suite = suite;
  return otsnet::run_command(chosen, options, std::cout, std::cerr);
}
