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

#include "otsnet/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"
#include "otsnet/thinking.hpp"

namespace otsnet {

void DecoderConfig::validate() const {
  if (depth < 1) throw ConfigError("decoder depth must be at least 1");
  if (max_len < 1) throw ConfigError("decoder max_len must be at least 1");
  if (head_dim == 0 || model_dim % head_dim != 0) throw ConfigError("decoder width not divisible by head dim");
}

FusionFeatures build_fusion(const Tensor& visual, const Tensor& semantic) {
  if (visual.dim() != 3) throw DimensionError("build_fusion: visual features must be [B, N, D]");
  if (!semantic.defined()) return {visual, visual.size(1), 0};
  if (semantic.dim() != 3 || semantic.size(0) != visual.size(0) || semantic.size(2) != visual.size(2)) {
    throw DimensionError("build_fusion: visual " + shape_str(visual.shape()) + " and semantic " +
                         shape_str(semantic.shape()) + " differ in batch or width");
  }
  return {concat({visual, semantic}, 1), visual.size(1), semantic.size(1)};
}

AttentionMask build_mask(std::size_t visual, std::size_t slots) {
  const std::size_t cols = visual + slots;
  AttentionMask mask{slots, cols, std::vector<std::uint8_t>(slots * cols, 0)};
  for (std::size_t i = 0; i < slots; ++i) {
    for (std::size_t j = 0; j <= visual + i; ++j) mask.allowed[i * cols + j] = 1;
  }
  return mask;
}

DecoderParams DecoderParams::create(ParameterStore& store, const std::string& prefix, const DecoderConfig& cfg) {
  cfg.validate();
  const std::size_t dim = cfg.model_dim;
  const std::size_t vocab = CharVocab::kSize;
  DecoderParams p;
  p.char_table = store.add(prefix + ".char_table", {vocab, dim}, InitSpec::normal(1.0));
  p.memory_norm = NormParams::create(store, prefix + ".memory_norm", dim);
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    const std::string name = prefix + ".layer" + std::to_string(i);
    p.layers.push_back({NormParams::create(store, name + ".self_norm", dim),
                        MhcaParams::create(store, name + ".self_attn", dim),
                        NormParams::create(store, name + ".cross_norm", dim),
                        MhcaParams::create(store, name + ".cross_attn", dim),
                        NormParams::create(store, name + ".ffn_norm", dim),
                        FeedForwardParams::create(store, name + ".ffn", dim, cfg.mlp_hidden)});
  }
  p.final_norm = NormParams::create(store, prefix + ".final_norm", dim);
  p.head_weight = store.add(prefix + ".head.weight", {dim, vocab}, InitSpec::projection(dim));
  p.head_bias = store.add(prefix + ".head.bias", {vocab}, InitSpec::zeros());
  return p;
}

Tensor char_embed(std::span<const int> ids, std::size_t batch, std::size_t length, const Tensor& table) {
  if (ids.size() != batch * length) throw DimensionError("char_embed: id count does not match [B, L]");
  Tensor rows = embedding(table, ids, {batch, length});
  return add(rows, slot_encoding(length, table.size(1)));
}

Tensor decode_train(const FusionFeatures& fusion, std::span<const int> input_ids, std::size_t length,
                    const DecoderParams& params, const DecoderConfig& cfg, AttentionSink* sink) {
  const std::size_t batch = fusion.tokens.size(0);
  if (length < 1 || length > cfg.max_len) {
    throw IndexError("decode length " + std::to_string(length) + " outside [1, " + std::to_string(cfg.max_len) + "]");
  }
  if (fusion.semantic > 0 && length > fusion.semantic) {
    throw DimensionError("decode length " + std::to_string(length) + " exceeds the " +
                         std::to_string(fusion.semantic) + " semantic slots");
  }
  const AttentionMask cross_mask = fusion.semantic > 0 ? build_mask(fusion.visual, fusion.semantic).top_rows(length)
                                                       : AttentionMask::all(length, fusion.visual);
  const AttentionMask self_mask = AttentionMask::causal(length);
  const std::size_t heads = cfg.heads();

  Tensor x = char_embed(input_ids, batch, length, params.char_table);
  Tensor memory = apply_layer_norm(fusion.tokens, params.memory_norm);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& layer = params.layers[i];
    Tensor normed = apply_layer_norm(x, layer.self_norm);
    x = add(x, mhca(normed, normed, layer.self_attn, heads, &self_mask));
    x = add(x, mhca(apply_layer_norm(x, layer.cross_norm), memory, layer.cross_attn, heads, &cross_mask, sink,
                    static_cast<int>(i), AttentionKind::kMmcvCross));
    x = add(x, feed_forward(apply_layer_norm(x, layer.ffn_norm), layer.ffn));
  }
  return add(matmul(apply_layer_norm(x, params.final_norm), params.head_weight), params.head_bias);
}

const char* stop_reason_name(StopReason reason) { return reason == StopReason::kEos ? "eos" : "max_len"; }

double Recognition::mean_confidence() const {
  if (confidences.empty()) return 0.0;
  double total = 0.0;
  for (double c : confidences) total += c;
  return total / static_cast<double>(confidences.size());
}

std::vector<Recognition> decode_infer(const FusionFeatures& fusion, const DecoderParams& params,
                                      const DecoderConfig& cfg, AttentionSink* sink) {
  NoGradGuard no_grad;
  const std::size_t batch = fusion.tokens.size(0);
  const std::size_t steps = fusion.semantic > 0 ? std::min(cfg.max_len, fusion.semantic) : cfg.max_len;
  const std::size_t vocab = CharVocab::kSize;
  std::vector<Recognition> out(batch);
  std::vector<bool> done(batch, false);
  std::vector<std::vector<int>> prefix(batch, std::vector<int>{CharVocab::kBos});
  for (std::size_t step = 0; step < steps; ++step) {
    const std::size_t length = step + 1;
    std::vector<int> ids;
    ids.reserve(batch * length);
    for (const auto& p : prefix) ids.insert(ids.end(), p.begin(), p.end());
    Tensor logits = decode_train(fusion, ids, length, params, cfg);
    const auto v = logits.data();
    bool all_done = true;
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) {
        prefix[b].push_back(CharVocab::kPad);
        continue;
      }
      const double* row = v.data() + (b * length + step) * vocab;
      // BOS and PAD are never targets; only classes and EOS compete.
      std::size_t best = CharVocab::kEos;
      for (std::size_t c = 0; c < static_cast<std::size_t>(CharVocab::kClasses); ++c) {
        if (row[c] >= row[best] && (row[c] > row[best] || c < best)) best = c;
      }
      double z = 0.0;
      for (std::size_t c = 0; c < vocab; ++c) z += std::exp(row[c] - row[best]);
      const double confidence = 1.0 / z;
      const int id = static_cast<int>(best);
      if (id == CharVocab::kEos) {
        out[b].stop = StopReason::kEos;
        out[b].confidences.push_back(confidence);
        prefix[b].push_back(CharVocab::kEos);
        done[b] = true;
      } else {
        out[b].ids.push_back(id);
        out[b].confidences.push_back(confidence);
        prefix[b].push_back(id);
      }
      all_done = all_done && done[b];
    }
    if (all_done) break;
  }
  if (sink) {
    // Re-run the longest prefix once so cross-attention maps cover every
    // emitted position.
    std::size_t longest = 1;
    for (const auto& r : out) longest = std::max(longest, std::min(steps, r.confidences.size()));
    std::vector<int> ids;
    for (const auto& p : prefix) ids.insert(ids.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(longest));
    decode_train(fusion, ids, longest, params, cfg, sink);
  }
  return out;
}

}  // namespace otsnet
