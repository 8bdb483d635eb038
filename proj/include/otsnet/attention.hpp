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
#include <string>
#include <vector>

#include "otsnet/parameters.hpp"
#include "otsnet/tensor.hpp"

namespace otsnet {

struct HeadConfig {
  std::size_t model_dim = 64;
  std::size_t head_dim = 16;
  double lambda_init = 0.05;

  // D / d; throws ConfigError unless exact.
  std::size_t attention_heads() const;
  // D / (2d); throws ConfigError unless exact.
  std::size_t differential_heads() const;
  void validate_lambda() const;
};

// Boolean visibility matrix, applied additively (hidden logits become -inf).
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  static AttentionMask all(std::size_t rows, std::size_t cols);
  // Row i sees columns 0..i (square).
  static AttentionMask causal(std::size_t n);
  bool allows(std::size_t row, std::size_t col) const { return allowed[row * cols + col] != 0; }
  // First `n` rows.
  AttentionMask top_rows(std::size_t n) const;
  // ContractError if some row has no visible column.
  void validate() const;
};

enum class AttentionKind { kMhsa, kDmhaA1, kDmhaA2, kDmhaDiff, kMhca, kMmcvCross };

const char* attention_kind_name(AttentionKind kind);

struct AttentionRecord {
  int layer = 0;
  int head = 0;
  std::size_t batch = 0;
  AttentionKind kind = AttentionKind::kMhsa;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> map;
  // Effective subtraction coefficient; only meaningful for DMHA kinds.
  double lambda = 0.0;
};

using AttentionSink = std::vector<AttentionRecord>;

struct FeedForwardParams {
  Tensor w1, b1, w2, b2;
  static FeedForwardParams create(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                  std::size_t hidden);
};

Tensor feed_forward(const Tensor& x, const FeedForwardParams& p);

struct NormParams {
  Tensor gain, bias;
  static NormParams create(ParameterStore& store, const std::string& prefix, std::size_t dim);
};

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kRmsNormEps = 1e-6;

Tensor apply_layer_norm(const Tensor& x, const NormParams& p);

// Pre-norm residual MLP that optionally precedes the attention sub-layer
// (split-FFN Macaron block: half-step FFN, attention, half-step FFN).
struct MacaronHalfStep {
  NormParams norm;
  FeedForwardParams ffn;
};

struct MhsaParams {
  NormParams norm1;
  Tensor wq, wk, wv;
  NormParams norm2;
  FeedForwardParams ffn;
  bool macaron_ffn = false;
  MacaronHalfStep pre;

  static MhsaParams create(ParameterStore& store, const std::string& prefix, const HeadConfig& cfg,
                           std::size_t mlp_hidden, bool macaron_ffn = false);
};

/// Standard self-attention block:
///   Q,K,V = LayerNorm(X) W_{q,k,v};  A = softmax(Q K^T / sqrt(d))
///   X' = X + A V;  out = X' + MLP(LayerNorm(X'))
/// Heads split the width D into D/d slices; there is no output projection.
Tensor mhsa_block(const Tensor& x, const MhsaParams& p, const HeadConfig& cfg, AttentionSink* sink = nullptr,
                  int layer = 0);

// Parameters of one differential head.
struct DualQkHeadParams {
  Tensor wq1, wq2, wk1, wk2;  // [in, d]
  Tensor wv;                  // [in, 2d]
  Tensor lambda_q1, lambda_k1, lambda_q2, lambda_k2;  // [d], zero-initialized

  static DualQkHeadParams create(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
                                 std::size_t head_dim);
};

/// exp(q1.k1) - exp(q2.k2) + lambda_init, as a differentiable scalar.
Tensor lambda_value(const Tensor& lambda_q1, const Tensor& lambda_k1, const Tensor& lambda_q2,
                    const Tensor& lambda_k2, double lambda_init);
double lambda_value(std::span<const double> lambda_q1, std::span<const double> lambda_k1,
                    std::span<const double> lambda_q2, std::span<const double> lambda_k2, double lambda_init);

/// One differential head: (softmax(Q1 K1^T/sqrt d) - lambda softmax(Q2 K2^T/sqrt d)) V.
/// x: [B, N, in] -> [B, N, 2d].
Tensor dual_qk_attention(const Tensor& x, const DualQkHeadParams& p, double lambda_init,
                         AttentionSink* sink = nullptr, int layer = 0, int head = 0);

struct DmhaParams {
  NormParams norm1;
  std::vector<DualQkHeadParams> heads;
  Tensor head_norm_gain;  // [2d], shared by all heads
  Tensor w_proj;          // [D, D]
  NormParams norm2;
  FeedForwardParams ffn;
  bool macaron_ffn = false;
  MacaronHalfStep pre;

  static DmhaParams create(ParameterStore& store, const std::string& prefix, const HeadConfig& cfg,
                           std::size_t mlp_hidden, bool macaron_ffn = false);
};

/// Differential multi-head attention block with h = D/(2d) heads:
///   head_i' = (1 - lambda_init) * RMSNorm(DualQK_i(LayerNorm(X)))
///   X' = X + Concat(head_1', ..., head_h') W_proj;  out = X' + MLP(LayerNorm(X'))
Tensor dmha_block(const Tensor& x, const DmhaParams& p, const HeadConfig& cfg, AttentionSink* sink = nullptr,
                  int layer = 0);

struct MhcaParams {
  Tensor wq, wk, wv, wo;  // [D, D]
  static MhcaParams create(ParameterStore& store, const std::string& prefix, std::size_t dim);
};

/// Multi-head cross-attention with D/d heads and output projection.
/// query [B, T, D], key_value [B, S, D] -> [B, T, D]. `mask` (T x S), when
/// given, hides logits additively.
Tensor mhca(const Tensor& query, const Tensor& key_value, const MhcaParams& p, std::size_t num_heads,
            const AttentionMask* mask = nullptr, AttentionSink* sink = nullptr, int layer = 0,
            AttentionKind kind = AttentionKind::kMhca);

// [B, N, h*d] <-> [B, h, N, d]
Tensor split_heads(const Tensor& x, std::size_t heads);
Tensor merge_heads(const Tensor& x);

}  // namespace otsnet
