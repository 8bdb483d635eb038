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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "otsnet/tensor.hpp"

namespace otsnet {

struct InitSpec {
  enum class Kind { kZeros, kOnes, kTruncatedNormal };
  Kind kind = Kind::kZeros;
  double stddev = 0.0;
  // Whether AdamW applies decoupled weight decay to this parameter.
  bool decay = false;

  static InitSpec zeros() { return {Kind::kZeros, 0.0, false}; }
  static InitSpec ones() { return {Kind::kOnes, 0.0, false}; }
  // Projection matrix: truncated normal (+-2 sigma) with sigma = 1/sqrt(fan_in).
  static InitSpec projection(std::size_t fan_in);
  static InitSpec normal(double stddev, bool decay = false) { return {Kind::kTruncatedNormal, stddev, decay}; }
};

struct Parameter {
  std::string name;
  Tensor tensor;
  InitSpec init;
};

// Ordered, name-unique collection of trainable tensors.
class ParameterStore {
 public:
  // Registers a new parameter (zero-filled until initialize()).
  // Throws ConfigError on a duplicate name.
  Tensor add(const std::string& name, const Shape& shape, InitSpec init);

  // Fills every parameter from its InitSpec. Each parameter draws from its
  // own stream keyed by (seed, name), so values do not depend on
  // registration order.
  void initialize(std::uint64_t seed);

  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<Parameter>& entries() const { return params_; }
  std::vector<Parameter>& entries() { return params_; }
  std::size_t total_elements() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Checkpoint directory layout: `manifest.txt` (one line per tensor:
// name, shape, dtype, byte offset) and `params.bin` (all values as one
// little-endian float64 blob, in manifest order).
void save_checkpoint(const ParameterStore& store, const std::filesystem::path& dir);

// Loads into an existing store. Every manifest entry must match a store
// parameter by name and shape and vice versa; otherwise CheckpointError
// naming the first offending tensor.
void load_checkpoint(ParameterStore& store, const std::filesystem::path& dir);

std::uint64_t hash_name(std::string_view text);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace otsnet
