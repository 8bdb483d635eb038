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

#include "otsnet/encoder.hpp"

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {

void PatchEmbedConfig::validate() const {
  if (patch_height == 0 || patch_width == 0 || image_height == 0 || image_width == 0 || channels == 0) {
    throw ConfigError("image and patch extents must be positive");
  }
  if (image_height % patch_height != 0 || image_width % patch_width != 0) {
    throw ConfigError("image " + std::to_string(image_height) + "x" + std::to_string(image_width) +
                      " is not divisible into " + std::to_string(patch_height) + "x" + std::to_string(patch_width) +
                      " patches");
  }
}

PatchEmbedParams PatchEmbedParams::create(ParameterStore& store, const std::string& prefix,
                                          const PatchEmbedConfig& cfg) {
  cfg.validate();
  return {store.add(prefix + ".weight", {cfg.patch_size(), cfg.model_dim}, InitSpec::projection(cfg.patch_size())),
          store.add(prefix + ".bias", {cfg.model_dim}, InitSpec::zeros()),
          store.add(prefix + ".position", {cfg.num_patches(), cfg.model_dim}, InitSpec::normal(0.02))};
}

Tensor patch_embed(const Tensor& image, const PatchEmbedConfig& cfg, const PatchEmbedParams& params) {
  cfg.validate();
  const Shape expected{image.dim() == 4 ? image.size(0) : 0, cfg.channels, cfg.image_height, cfg.image_width};
  if (image.dim() != 4 || image.shape() != expected) {
    throw DimensionError("patch_embed: expected [B, " + std::to_string(cfg.channels) + ", " +
                         std::to_string(cfg.image_height) + ", " + std::to_string(cfg.image_width) + "], got " +
                         shape_str(image.shape()));
  }
  const std::size_t batch = image.size(0);
  const std::size_t n = cfg.num_patches(), ps = cfg.patch_size();
  const auto px = image.data();
  std::vector<double> patches(batch * n * ps);
  std::size_t out = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t gr = 0; gr < cfg.grid_rows(); ++gr) {
      for (std::size_t gc = 0; gc < cfg.grid_cols(); ++gc) {
        for (std::size_t c = 0; c < cfg.channels; ++c) {
          for (std::size_t r = 0; r < cfg.patch_height; ++r) {
            const std::size_t y = gr * cfg.patch_height + r;
            const std::size_t row_base = ((b * cfg.channels + c) * cfg.image_height + y) * cfg.image_width;
            for (std::size_t k = 0; k < cfg.patch_width; ++k) patches[out++] = px[row_base + gc * cfg.patch_width + k];
          }
        }
      }
    }
  }
  Tensor tokens = Tensor::from({batch, n, ps}, std::move(patches));
  return add(add(matmul(tokens, params.weight), params.bias), params.position);
}

std::size_t MacaronStack::depth() const {
  std::size_t d = 0;
  for (const auto& s : segments) d += s.length;
  return d;
}

std::vector<BlockKind> MacaronStack::layer_kinds() const {
  std::vector<BlockKind> kinds;
  for (const auto& s : segments) kinds.insert(kinds.end(), s.length, s.kind);
  return kinds;
}

std::vector<std::size_t> MacaronStack::lengths() const {
  std::vector<std::size_t> out;
  for (const auto& s : segments) out.push_back(s.length);
  return out;
}

EncoderVariant parse_encoder_variant(const std::string& name) {
  if (name == "vit") return EncoderVariant::kVit;
  if (name == "dmha_only") return EncoderVariant::kDmhaOnly;
  if (name == "dame") return EncoderVariant::kDame;
  throw ConfigError("unknown encoder variant '" + name + "' (expected vit, dmha_only or dame)");
}

const char* encoder_variant_name(EncoderVariant variant) {
  switch (variant) {
    case EncoderVariant::kVit: return "vit";
    case EncoderVariant::kDmhaOnly: return "dmha_only";
    case EncoderVariant::kDame: return "dame";
  }
  return "unknown";
}

MacaronStack build_ablation_stack(EncoderVariant variant, std::size_t depth, const HeadConfig& heads,
                                  bool macaron_ffn) {
  if (depth < 1) throw ConfigError("encoder depth must be at least 1");
  MacaronStack stack;
  stack.heads = heads;
  stack.macaron_ffn = macaron_ffn;
  switch (variant) {
    case EncoderVariant::kVit:
      stack.segments = {{BlockKind::kMhsa, depth}};
      break;
    case EncoderVariant::kDmhaOnly:
      stack.segments = {{BlockKind::kDmha, depth}};
      break;
    case EncoderVariant::kDame: {
      if (depth < 3) throw ConfigError("dame needs depth >= 3 to form an MHSA-DMHA-MHSA sandwich");
      std::size_t outer = (depth + 5) / 6;
      std::size_t second_dmha = 1;
      if (depth < 5) {
        outer = 1;
        second_dmha = 0;
      }
      const std::size_t middle = depth - 2 * outer - 1 - second_dmha;
      stack.segments = {{BlockKind::kMhsa, outer},
                        {BlockKind::kDmha, 1},
                        {BlockKind::kMhsa, middle},
                        {BlockKind::kDmha, second_dmha},
                        {BlockKind::kMhsa, outer}};
      break;
    }
  }
  return stack;
}

EncoderParams EncoderParams::create(ParameterStore& store, const std::string& prefix, const PatchEmbedConfig& patch,
                                    const MacaronStack& stack, std::size_t mlp_hidden) {
  if (patch.model_dim != stack.heads.model_dim) throw ConfigError("patch embedding width differs from model dim");
  EncoderParams p;
  p.embed = PatchEmbedParams::create(store, prefix + ".patch", patch);
  std::size_t index = 0;
  for (BlockKind kind : stack.layer_kinds()) {
    const std::string name = prefix + ".layer" + std::to_string(index++);
    if (kind == BlockKind::kMhsa) {
      p.layers.emplace_back(MhsaParams::create(store, name, stack.heads, mlp_hidden, stack.macaron_ffn));
    } else {
      p.layers.emplace_back(DmhaParams::create(store, name, stack.heads, mlp_hidden, stack.macaron_ffn));
    }
  }
  p.final_norm = NormParams::create(store, prefix + ".final_norm", patch.model_dim);
  return p;
}

Tensor encode(const Tensor& tokens, const MacaronStack& stack, const EncoderParams& params, AttentionSink* sink) {
  if (tokens.dim() != 3 || tokens.size(-1) != stack.heads.model_dim) {
    throw DimensionError("encode: tokens " + shape_str(tokens.shape()) + " do not match model dim " +
                         std::to_string(stack.heads.model_dim));
  }
  if (params.layers.size() != stack.depth()) throw ConfigError("encoder parameters do not match the layer plan");
  Tensor x = tokens;
  const auto kinds = stack.layer_kinds();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const int layer = static_cast<int>(i);
    if (kinds[i] == BlockKind::kMhsa) {
      x = mhsa_block(x, std::get<MhsaParams>(params.layers[i]), stack.heads, sink, layer);
    } else {
      x = dmha_block(x, std::get<DmhaParams>(params.layers[i]), stack.heads, sink, layer);
    }
  }
  return apply_layer_norm(x, params.final_norm);
}

}  // namespace otsnet
