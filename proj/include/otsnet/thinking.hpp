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
#include <string>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/parameters.hpp"
#include "otsnet/tensor.hpp"

namespace otsnet {

/// Fixed sinusoid table [T, D]: even column 2i holds sin(t / 10000^(2i/D)),
/// odd column 2i+1 holds cos of the same angle, for t = 0..T-1.
Tensor slot_encoding(std::size_t slots, std::size_t dim);

/// Position-aware alignment: unmasked cross-attention from slot queries
/// F_p [B, T, D] (or a shared [T, D] table) to visual tokens F_v [B, N, D].
Tensor pam_align(const Tensor& slot_queries, const Tensor& visual, const MhcaParams& params, std::size_t num_heads,
                 AttentionSink* sink = nullptr, int layer = 0);

struct SemanticQuantizerParams {
  Tensor phi_weight;  // [D, C]
  Tensor phi_bias;    // [C]
  Tensor codebook;    // [C, D]
  static SemanticQuantizerParams create(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                        std::size_t units);
};

/// Q = F_u W + b: logits over C semantic units.
Tensor sq_project(const Tensor& focus, const SemanticQuantizerParams& params);

/// Counter-based Gumbel(0, 1) noise: every value is a pure function of
/// (seed, step, batch index, slot, unit), so draws are reproducible and
/// independent of evaluation order.
struct GumbelKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

double gumbel_sample(const GumbelKey& key, std::size_t batch, std::size_t slot, std::size_t unit);
/// Noise tensor for logits of shape [B, T, C] (batch offset shifts the batch index).
Tensor gumbel_noise(const Shape& shape, const GumbelKey& key, std::size_t batch_offset = 0);

/// softmax((q + G) / tau) over the last axis. `noise` undefined means G = 0.
/// tau <= 0 is a ContractError.
Tensor gumbel_softmax(const Tensor& logits, double tau, const Tensor& noise = {});

/// Row-wise argmax with lowest-index tie-breaking.
std::vector<int> hard_quantize(const Tensor& logits);
/// One-hot rows of the hard argmax, same shape as `logits`.
Tensor hard_one_hot(const Tensor& logits);

/// F_q = p E. Every row of p must sum to 1 within 1e-6 (ContractError).
Tensor codebook_embed(const Tensor& distribution, const Tensor& codebook);

enum class SqMode { kNone, kNormal, kDetach, kGumbel };

SqMode parse_sq_mode(const std::string& name);
const char* sq_mode_name(SqMode mode);

struct QuantizeOptions {
  double tau = 1.0;
  std::optional<GumbelKey> noise;  // gumbel mode: sampled noise when set, G = 0 otherwise
  bool hard = false;               // inference: gumbel mode uses the hard argmax
};

/// Maps SQ logits to a distribution over units according to the variant:
///   normal: softmax(Q)
///   detach: softmax(stop_gradient(Q))
///   gumbel: gumbel_softmax(Q, tau, G), or one-hot argmax when `hard`
/// kNone is a ContractError (no quantizer in the pipeline).
Tensor sq_distribution(const Tensor& logits, SqMode mode, const QuantizeOptions& options);

}  // namespace otsnet
