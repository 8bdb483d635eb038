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

#include <string>
#include <variant>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/parameters.hpp"
#include "otsnet/tensor.hpp"

namespace otsnet {

struct PatchEmbedConfig {
  std::size_t image_height = 8;
  std::size_t image_width = 32;
  std::size_t channels = 1;
  std::size_t patch_height = 4;
  std::size_t patch_width = 4;
  std::size_t model_dim = 64;

  void validate() const;
  std::size_t grid_rows() const { return image_height / patch_height; }
  std::size_t grid_cols() const { return image_width / patch_width; }
  std::size_t num_patches() const { return grid_rows() * grid_cols(); }
  std::size_t patch_size() const { return patch_height * patch_width * channels; }
};

struct PatchEmbedParams {
  Tensor weight;    // [patch_size, D]
  Tensor bias;      // [D]
  Tensor position;  // [N, D], learnable
  static PatchEmbedParams create(ParameterStore& store, const std::string& prefix, const PatchEmbedConfig& cfg);
};

/// Splits [B, C, H, W] into non-overlapping patches (row-major over the
/// patch grid; each patch flattened channel, row, column), projects them to
/// D and adds the position embedding. The image itself is treated as data:
/// no gradient flows back into it.
Tensor patch_embed(const Tensor& image, const PatchEmbedConfig& cfg, const PatchEmbedParams& params);

enum class BlockKind { kMhsa, kDmha };

struct Segment {
  BlockKind kind;
  std::size_t length;
};

/// Layer plan of the encoder. The default DAME plan is five segments
/// (MHSA, DMHA, MHSA, DMHA, MHSA) with lengths (2, 1, 6, 1, 2).
struct MacaronStack {
  std::vector<Segment> segments;
  HeadConfig heads;
  bool macaron_ffn = false;

  std::size_t depth() const;
  // Per-layer kinds in application order.
  std::vector<BlockKind> layer_kinds() const;
  std::vector<std::size_t> lengths() const;
};

enum class EncoderVariant { kVit, kDmhaOnly, kDame };

EncoderVariant parse_encoder_variant(const std::string& name);
const char* encoder_variant_name(EncoderVariant variant);

/// vit: one MHSA segment; dmha_only: one DMHA segment; dame: sandwich with
/// outer segments ceil(depth/6), one DMHA layer per DMHA segment and the
/// remainder in the middle. Depth 3 and 4 keep a single DMHA layer
/// (1,1,depth-3,0,1). dame below depth 3 is a ConfigError.
MacaronStack build_ablation_stack(EncoderVariant variant, std::size_t depth, const HeadConfig& heads,
                                  bool macaron_ffn = false);

using EncoderLayer = std::variant<MhsaParams, DmhaParams>;

struct EncoderParams {
  PatchEmbedParams embed;
  std::vector<EncoderLayer> layers;
  NormParams final_norm;

  static EncoderParams create(ParameterStore& store, const std::string& prefix, const PatchEmbedConfig& patch,
                              const MacaronStack& stack, std::size_t mlp_hidden);
};

/// Applies the stack's layers in order to patch tokens and a final
/// LayerNorm, producing the visual features F_v. Records maps with
/// layer = 0-based encoder layer index.
Tensor encode(const Tensor& tokens, const MacaronStack& stack, const EncoderParams& params,
              AttentionSink* sink = nullptr);

}  // namespace otsnet
