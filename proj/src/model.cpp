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

#include "otsnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {

void ModelConfig::validate() const {
  patch_config().validate();
  const HeadConfig heads = head_config();
  heads.attention_heads();
  heads.validate_lambda();
  if (encoder != EncoderVariant::kVit) heads.differential_heads();
  if (slots < 1) throw ConfigError("slots must be at least 1");
  if (codebook_size != static_cast<std::size_t>(CharVocab::kClasses)) {
    throw ConfigError("codebook size must equal the " + std::to_string(CharVocab::kClasses) +
                      " character classes so the quantizer loss is defined");
  }
  if (mlp_ratio < 1) throw ConfigError("mlp_ratio must be at least 1");
  if (!use_pam && !use_mmcv) throw ConfigError("at least one of PAM or MMCV must be enabled");
  if (!use_pam && (sq_mode != SqMode::kNone || sq_logits_without_quantizer)) {
    throw ConfigError("the semantic quantizer needs PAM slot features");
  }
  decoder_config().validate();
}

PatchEmbedConfig ModelConfig::patch_config() const {
  return {image_height, image_width, channels, patch_height, patch_width, model_dim};
}

HeadConfig ModelConfig::head_config() const { return {model_dim, head_dim, lambda_init}; }

MacaronStack ModelConfig::stack() const { return build_ablation_stack(encoder, encoder_depth, head_config(), macaron_ffn); }

DecoderConfig ModelConfig::decoder_config() const {
  return {decoder_depth, model_dim, head_dim, slots, mlp_hidden()};
}

OtsNet::OtsNet(const ModelConfig& config) : config_(config) {
  config_.validate();
  stack_ = config_.stack();
  encoder_ = EncoderParams::create(store_, "encoder", config_.patch_config(), stack_, config_.mlp_hidden());
  if (config_.use_pam) pam_ = MhcaParams::create(store_, "pam", config_.model_dim);
  if (config_.has_sq_logits()) {
    sq_ = SemanticQuantizerParams::create(store_, "sq", config_.model_dim, config_.codebook_size);
  }
  if (config_.use_mmcv) {
    decoder_ = DecoderParams::create(store_, "mmcv", config_.decoder_config());
  } else {
    parallel_norm_ = NormParams::create(store_, "parallel.norm", config_.model_dim);
    parallel_weight_ = store_.add("parallel.weight", {config_.model_dim, static_cast<std::size_t>(CharVocab::kSize)},
                                  InitSpec::projection(config_.model_dim));
    parallel_bias_ = store_.add("parallel.bias", {static_cast<std::size_t>(CharVocab::kSize)}, InitSpec::zeros());
  }
  slot_table_ = slot_encoding(config_.slots, config_.model_dim);
}

Tensor OtsNet::observe(const Tensor& images, AttentionSink* sink) const {
  return encode(patch_embed(images, config_.patch_config(), encoder_.embed), stack_, encoder_, sink);
}

OtsNet::Thought OtsNet::think(const Tensor& visual, std::size_t slots, const ForwardOptions& options) const {
  Thought t;
  if (!config_.use_pam) return t;
  const Tensor queries = slots == config_.slots ? slot_table_ : slice(slot_table_, 0, 0, slots);
  t.focus = pam_align(queries, visual, pam_, config_.head_config().attention_heads(), options.sink, 0);
  t.semantic = t.focus;
  if (config_.has_sq_logits()) t.sq_logits = sq_project(t.focus, sq_);
  if (config_.sq_mode != SqMode::kNone) {
    QuantizeOptions q{options.tau, options.noise, options.hard};
    t.semantic = codebook_embed(sq_distribution(t.sq_logits, config_.sq_mode, q), sq_.codebook);
  }
  return t;
}

Tensor OtsNet::parallel_logits(const Tensor& semantic) const {
  return add(matmul(apply_layer_norm(semantic, parallel_norm_), parallel_weight_), parallel_bias_);
}

ForwardResult OtsNet::forward(const Tensor& images, const LabelBatch& labels, const ForwardOptions& options) const {
  if (labels.length < 1 || labels.length > config_.slots) {
    throw IndexError("label frame length " + std::to_string(labels.length) + " outside [1, " +
                     std::to_string(config_.slots) + "]");
  }
  if (images.dim() != 4 || images.size(0) != labels.batch) {
    throw DimensionError("forward: " + std::to_string(labels.batch) + " labels for images " + shape_str(images.shape()));
  }
  ForwardResult r;
  r.visual = observe(images, options.sink);
  Thought t = think(r.visual, labels.length, options);
  r.focus = t.focus;
  r.sq_logits = t.sq_logits;
  r.semantic = t.semantic;
  if (config_.use_mmcv) {
    const FusionFeatures fusion = build_fusion(r.visual, t.semantic);
    r.logits = decode_train(fusion, labels.decoder_input, labels.length, decoder_, config_.decoder_config(),
                            options.sink);
  } else {
    r.logits = parallel_logits(t.semantic);
  }
  return r;
}

std::vector<Recognition> OtsNet::recognize(const Tensor& images, AttentionSink* sink) const {
  NoGradGuard no_grad;
  ForwardOptions options;
  options.hard = true;
  options.sink = sink;
  Tensor visual = observe(images, sink);
  Thought t = think(visual, config_.slots, options);
  if (config_.use_mmcv) {
    return decode_infer(build_fusion(visual, t.semantic), decoder_, config_.decoder_config(), sink);
  }
  // Parallel slot classification: read slots until the first EOS.
  Tensor logits = parallel_logits(t.semantic);
  const std::size_t batch = images.size(0), slots = config_.slots, vocab = CharVocab::kSize;
  std::vector<Recognition> out(batch);
  const auto v = logits.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t s = 0; s < slots; ++s) {
      const double* row = v.data() + (b * slots + s) * vocab;
      std::size_t best = CharVocab::kEos;
      for (std::size_t c = 0; c < static_cast<std::size_t>(CharVocab::kClasses); ++c) {
        if (row[c] > row[best] || (row[c] == row[best] && c < best)) best = c;
      }
      double z = 0.0;
      for (std::size_t c = 0; c < vocab; ++c) z += std::exp(row[c] - row[best]);
      out[b].confidences.push_back(1.0 / z);
      if (best == static_cast<std::size_t>(CharVocab::kEos)) {
        out[b].stop = StopReason::kEos;
        break;
      }
      out[b].ids.push_back(static_cast<int>(best));
    }
  }
  return out;
}

Tensor OtsNet::semantic_features(const Tensor& images) const {
  NoGradGuard no_grad;
  if (!config_.use_pam) throw ConfigError("semantic features need PAM");
  ForwardOptions options;
  options.hard = true;
  return think(observe(images, nullptr), config_.slots, options).semantic;
}

Tensor stack_images(const std::vector<const std::vector<double>*>& images, std::size_t height, std::size_t width) {
  if (images.empty()) throw DimensionError("stack_images: empty batch");
  std::vector<double> values;
  values.reserve(images.size() * height * width);
  for (const auto* img : images) {
    if (img->size() != height * width) {
      throw DimensionError("image holds " + std::to_string(img->size()) + " pixels, expected " +
                           std::to_string(height * width));
    }
    values.insert(values.end(), img->begin(), img->end());
  }
  return Tensor::from({images.size(), 1, height, width}, std::move(values));
}

}  // namespace otsnet
