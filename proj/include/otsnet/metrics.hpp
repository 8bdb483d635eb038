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

#include <map>
#include <string>
#include <vector>

#include "otsnet/decoder.hpp"
#include "otsnet/synth.hpp"

namespace otsnet {

class OtsNet;

/// Levenshtein distance with unit costs.
std::size_t edit_distance(const std::string& a, const std::string& b);

/// 1 - d(a, b) / max(|a|, |b|); 1 when both are empty.
double char_similarity(const std::string& prediction, const std::string& label);

struct SubsetMetrics {
  std::size_t count = 0;
  double sequence_accuracy = 0.0;
  double character_accuracy = 0.0;
};

struct Metrics {
  std::size_t count = 0;
  double sequence_accuracy = 0.0;   // exact matches / total
  double character_accuracy = 0.0;  // mean char_similarity
  std::map<std::string, SubsetMetrics> subsets;  // keyed "len=K"
};

/// Scores predictions against labels; subsets break the result down by
/// label length.
Metrics score(const std::vector<std::string>& predictions, const std::vector<std::string>& labels);

/// Greedy recognition of rasters in batches. Batches are spread over
/// `threads` workers; results keep input order.
std::vector<Recognition> recognize_all(const OtsNet& model, const std::vector<const std::vector<double>*>& images,
                                       std::size_t batch_size, std::size_t threads = 1);

/// Greedy recognition of every sample followed by `score`.
Metrics evaluate(const OtsNet& model, const std::vector<SyntheticSample>& samples, std::size_t batch_size = 64,
                 std::vector<Recognition>* recognitions = nullptr, std::size_t threads = 1);

}  // namespace otsnet
