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

#include <span>
#include <string>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/parameters.hpp"
#include "otsnet/tensor.hpp"
#include "otsnet/vocab.hpp"

namespace otsnet {

struct DecoderConfig {
  std::size_t depth = 3;
  std::size_t model_dim = 64;
  std::size_t head_dim = 16;
  std::size_t max_len = 25;
  std::size_t mlp_hidden = 128;

  void validate() const;
  std::size_t heads() const { return model_dim / head_dim; }
};

/// Visual tokens followed by semantic tokens along the token axis.
struct FusionFeatures {
  Tensor tokens;  // [B, N + T, D]
  std::size_t visual = 0;
  std::size_t semantic = 0;
};

/// Concat(F_v, F_q). An undefined F_q yields visual-only memory.
FusionFeatures build_fusion(const Tensor& visual, const Tensor& semantic);

/// Cross-attention visibility for T decoding positions over N visual and T
/// semantic tokens: row i (0-based) sees columns j <= N + i.
AttentionMask build_mask(std::size_t visual, std::size_t slots);

struct DecoderLayerParams {
  NormParams self_norm;
  MhcaParams self_attn;
  NormParams cross_norm;
  MhcaParams cross_attn;
  NormParams ffn_norm;
  FeedForwardParams ffn;
};

struct DecoderParams {
  Tensor char_table;  // [|vocab|, D]
  NormParams memory_norm;
  std::vector<DecoderLayerParams> layers;
  NormParams final_norm;
  Tensor head_weight;  // [D, |vocab|]
  Tensor head_bias;    // [|vocab|]

  static DecoderParams create(ParameterStore& store, const std::string& prefix, const DecoderConfig& cfg);
};

/// Table lookup plus the shared sinusoid for each position.
/// ids: [B, L] row-major.
Tensor char_embed(std::span<const int> ids, std::size_t batch, std::size_t length, const Tensor& table);

/// Teacher-forced decoding. `input_ids` is [B, L] with L <= max_len (and
/// L <= semantic token count when semantic tokens are present); returns
/// logits [B, L, |vocab|]. Layers: causal self-attention, masked
/// cross-attention over the fused memory, feed-forward, all pre-norm
/// residual.
Tensor decode_train(const FusionFeatures& fusion, std::span<const int> input_ids, std::size_t length,
                    const DecoderParams& params, const DecoderConfig& cfg, AttentionSink* sink = nullptr);

enum class StopReason { kEos, kMaxLen };
const char* stop_reason_name(StopReason reason);

struct Recognition {
  std::vector<int> ids;             // recognized classes, EOS excluded
  std::vector<double> confidences;  // probability of each chosen id
  StopReason stop = StopReason::kMaxLen;

  std::string text() const { return CharVocab::decode(ids); }
  double mean_confidence() const;
};

/// Greedy autoregressive decoding from BOS, recomputing the full prefix at
/// every step. Stops per sample at EOS or after max_len steps.
std::vector<Recognition> decode_infer(const FusionFeatures& fusion, const DecoderParams& params,
                                      const DecoderConfig& cfg, AttentionSink* sink = nullptr);

}  // namespace otsnet
