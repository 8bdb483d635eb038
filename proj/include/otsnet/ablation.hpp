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

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "otsnet/config.hpp"
#include "otsnet/metrics.hpp"

namespace otsnet {

struct AblationVariant {
  std::string name;
  std::function<void(RunConfig&)> apply;
};

/// Variants of a suite: dame, modules, sq_variants, alpha, lambda.
/// "alpha_sweep" and "lambda_sweep" are accepted as aliases.
std::vector<AblationVariant> ablation_suite(const std::string& suite);
std::vector<std::string> ablation_suite_names();

struct AblationRow {
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::vector<Metrics> heldout;  // one per seed
  std::vector<Metrics> train;
  double median_sequence = 0.0;
  double median_character = 0.0;
};

struct Verdict {
  std::string claim;
  bool holds = false;
};

struct AblationResult {
  std::string suite;
  std::vector<AblationRow> rows;
  std::vector<Verdict> verdicts;
};

double median(std::vector<double> values);

/// Splits a corpus into its leading training part and trailing held-out part.
void split_corpus(const std::vector<SyntheticSample>& corpus, double heldout_fraction,
                  std::vector<SyntheticSample>& train, std::vector<SyntheticSample>& heldout);

/// Trains every variant of the suite for each of base.ablation.seeds seeds
/// (base.train.seed, +1, ...) on one shared synthetic corpus and scores the
/// held-out split. `progress` receives one line per finished run.
AblationResult run_ablation(const std::string& suite, const RunConfig& base,
                            const std::function<void(const std::string&)>& progress = {});

/// Directional checks; the dame suite compares dame against the baselines
/// with 1 and 2 point tolerances.
std::vector<Verdict> ablation_verdicts(const std::string& suite, const std::vector<AblationRow>& rows);

/// Header plus one comma-separated row per variant.
void write_ablation_table(std::ostream& out, const AblationResult& result);

}  // namespace otsnet
