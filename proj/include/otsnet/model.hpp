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
#include <optional>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/decoder.hpp"
#include "otsnet/encoder.hpp"
#include "otsnet/parameters.hpp"
#include "otsnet/thinking.hpp"
#include "otsnet/vocab.hpp"

namespace otsnet {

struct ModelConfig {
  std::size_t image_height = 8;
  std::size_t image_width = 32;
  std::size_t channels = 1;
  std::size_t patch_height = 4;
  std::size_t patch_width = 4;
  std::size_t model_dim = 64;
  std::size_t head_dim = 16;
  std::size_t mlp_ratio = 2;
  double lambda_init = 0.05;
  EncoderVariant encoder = EncoderVariant::kDame;
  std::size_t encoder_depth = 12;
  bool macaron_ffn = false;
  std::size_t slots = 25;  // T == decoder max length
  std::size_t codebook_size = 96;
  std::size_t decoder_depth = 3;
  bool use_pam = true;
  bool use_mmcv = true;
  SqMode sq_mode = SqMode::kGumbel;
  // Computes SQ logits for the auxiliary loss even when sq_mode is none.
  bool sq_logits_without_quantizer = false;

  void validate() const;
  PatchEmbedConfig patch_config() const;
  HeadConfig head_config() const;
  MacaronStack stack() const;
  DecoderConfig decoder_config() const;
  std::size_t mlp_hidden() const { return mlp_ratio * model_dim; }
  bool has_sq_logits() const { return use_pam && (sq_mode != SqMode::kNone || sq_logits_without_quantizer); }
};

struct ForwardOptions {
  double tau = 1.0;
  std::optional<GumbelKey> noise;
  // Inference-time quantization (hard argmax in gumbel mode).
  bool hard = false;
  AttentionSink* sink = nullptr;
};

struct ForwardResult {
  Tensor logits;     // [B, L, |vocab|]
  Tensor sq_logits;  // [B, L, C], undefined without a quantizer head
  Tensor visual;     // F_v
  Tensor focus;      // F_u, undefined without PAM
  Tensor semantic;   // F_q (or F_u when SQ is off), undefined without PAM
};

/// The full recognizer: patch embedding and Macaron encoder, PAM slot
/// alignment, semantic quantizer, and the masked multi-modal decoder.
/// Optional stages can be disabled for ablations.
class OtsNet {
 public:
  explicit OtsNet(const ModelConfig& config);

  OtsNet(const OtsNet&) = delete;
  OtsNet& operator=(const OtsNet&) = delete;

  void initialize(std::uint64_t seed) { store_.initialize(seed); }
  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  /// Teacher-forced pass. Only the first `labels.length` slots are
  /// computed; because every later slot is invisible to earlier decoding
  /// positions the logits equal the leading rows of a full-length pass.
  ForwardResult forward(const Tensor& images, const LabelBatch& labels, const ForwardOptions& options = {}) const;

  /// Greedy recognition of a batch of images [B, C, H, W].
  std::vector<Recognition> recognize(const Tensor& images, AttentionSink* sink = nullptr) const;

  /// F_q rows for every slot (inference-time quantization), [B, T, D].
  Tensor semantic_features(const Tensor& images) const;

 private:
  struct Thought {
    Tensor focus, sq_logits, semantic;
  };
  Tensor observe(const Tensor& images, AttentionSink* sink) const;
  Thought think(const Tensor& visual, std::size_t slots, const ForwardOptions& options) const;
  Tensor parallel_logits(const Tensor& semantic) const;

  ModelConfig config_;
  MacaronStack stack_;
  ParameterStore store_;
  EncoderParams encoder_;
  MhcaParams pam_;
  SemanticQuantizerParams sq_;
  DecoderParams decoder_;
  NormParams parallel_norm_;
  Tensor parallel_weight_, parallel_bias_;
  Tensor slot_table_;
};

/// Packs grayscale rasters (each H*W values) into a [B, 1, H, W] tensor.
Tensor stack_images(const std::vector<const std::vector<double>*>& images, std::size_t height, std::size_t width);

}  // namespace otsnet
