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

#include "otsnet/attention.hpp"

#include <cmath>

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {

namespace {

// Appends one record per (batch, head) of a [B, H, R, C] (or [B, R, C]
// with H = 1) attention tensor.
void record_maps(AttentionSink* sink, const Tensor& maps, std::size_t heads, int layer, int head_offset,
                 AttentionKind kind, double lambda = 0.0) {
  if (!sink) return;
  const std::size_t rows = maps.size(-2), cols = maps.size(-1);
  const std::size_t batches = maps.numel() / (heads * rows * cols);
  const auto data = maps.data();
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      AttentionRecord rec;
      rec.layer = layer;
      rec.head = head_offset + static_cast<int>(h);
      rec.batch = b;
      rec.kind = kind;
      rec.rows = rows;
      rec.cols = cols;
      rec.lambda = lambda;
      const auto begin = data.begin() + static_cast<std::ptrdiff_t>((b * heads + h) * rows * cols);
      rec.map.assign(begin, begin + static_cast<std::ptrdiff_t>(rows * cols));
      sink->push_back(std::move(rec));
    }
  }
}

void require_width(const Tensor& x, std::size_t width, const char* op) {
  if (x.dim() != 3 || x.size(-1) != width) {
    throw DimensionError(std::string(op) + ": expected [B, N, " + std::to_string(width) + "], got " +
                         shape_str(x.shape()));
  }
}

Tensor residual_ffn(const Tensor& x, const NormParams& norm, const FeedForwardParams& ffn, double weight) {
  Tensor update = feed_forward(apply_layer_norm(x, norm), ffn);
  return add(x, weight == 1.0 ? update : scale(update, weight));
}

}  // namespace

std::size_t HeadConfig::attention_heads() const {
  if (head_dim == 0 || model_dim % head_dim != 0) {
    throw ConfigError("model dim " + std::to_string(model_dim) + " is not divisible by head dim " +
                      std::to_string(head_dim));
  }
  return model_dim / head_dim;
}

std::size_t HeadConfig::differential_heads() const {
  if (head_dim == 0 || model_dim % (2 * head_dim) != 0) {
    throw ConfigError("differential heads need D = 2*d*h; D=" + std::to_string(model_dim) +
                      ", d=" + std::to_string(head_dim));
  }
  return model_dim / (2 * head_dim);
}

void HeadConfig::validate_lambda() const {
  if (!(lambda_init > 0.0 && lambda_init < 1.0)) {
    throw ConfigError("lambda_init must lie in (0, 1), got " + std::to_string(lambda_init));
  }
}

AttentionMask AttentionMask::all(std::size_t rows, std::size_t cols) {
  return {rows, cols, std::vector<std::uint8_t>(rows * cols, 1)};
}

AttentionMask AttentionMask::causal(std::size_t n) {
  AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.allowed[i * n + j] = 1;
  }
  return m;
}

AttentionMask AttentionMask::top_rows(std::size_t n) const {
  if (n > rows) throw DimensionError("mask has only " + std::to_string(rows) + " rows");
  AttentionMask m{n, cols, {}};
  m.allowed.assign(allowed.begin(), allowed.begin() + static_cast<std::ptrdiff_t>(n * cols));
  return m;
}

void AttentionMask::validate() const {
  if (allowed.size() != rows * cols) throw DimensionError("mask storage does not match its extents");
  for (std::size_t i = 0; i < rows; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < cols && !any; ++j) any = allows(i, j);
    if (!any) throw ContractError("attention mask row " + std::to_string(i) + " hides every position");
  }
}

const char* attention_kind_name(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kMhsa: return "mhsa";
    case AttentionKind::kDmhaA1: return "dmha_a1";
    case AttentionKind::kDmhaA2: return "dmha_a2";
    case AttentionKind::kDmhaDiff: return "dmha_diff";
    case AttentionKind::kMhca: return "mhca";
    case AttentionKind::kMmcvCross: return "mmcv_cross";
  }
  return "unknown";
}

FeedForwardParams FeedForwardParams::create(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                            std::size_t hidden) {
  return {store.add(prefix + ".w1", {dim, hidden}, InitSpec::projection(dim)),
          store.add(prefix + ".b1", {hidden}, InitSpec::zeros()),
          store.add(prefix + ".w2", {hidden, dim}, InitSpec::projection(hidden)),
          store.add(prefix + ".b2", {dim}, InitSpec::zeros())};
}

Tensor feed_forward(const Tensor& x, const FeedForwardParams& p) {
  return add(matmul(gelu(add(matmul(x, p.w1), p.b1)), p.w2), p.b2);
}

NormParams NormParams::create(ParameterStore& store, const std::string& prefix, std::size_t dim) {
  return {store.add(prefix + ".gain", {dim}, InitSpec::ones()), store.add(prefix + ".bias", {dim}, InitSpec::zeros())};
}

Tensor apply_layer_norm(const Tensor& x, const NormParams& p) { return layer_norm(x, p.gain, p.bias, kLayerNormEps); }

Tensor split_heads(const Tensor& x, std::size_t heads) {
  const std::size_t b = x.size(0), n = x.size(1), width = x.size(2);
  if (width % heads != 0) throw DimensionError("width " + std::to_string(width) + " not divisible into heads");
  return permute(reshape(x, {b, n, heads, width / heads}), {0, 2, 1, 3});
}

Tensor merge_heads(const Tensor& x) {
  const std::size_t b = x.size(0), h = x.size(1), n = x.size(2), d = x.size(3);
  return reshape(permute(x, {0, 2, 1, 3}), {b, n, h * d});
}

MhsaParams MhsaParams::create(ParameterStore& store, const std::string& prefix, const HeadConfig& cfg,
                              std::size_t mlp_hidden, bool macaron_ffn) {
  const std::size_t dim = cfg.model_dim;
  cfg.attention_heads();
  MhsaParams p;
  p.macaron_ffn = macaron_ffn;
  if (macaron_ffn) {
    p.pre.norm = NormParams::create(store, prefix + ".pre_norm", dim);
    p.pre.ffn = FeedForwardParams::create(store, prefix + ".pre_ffn", dim, mlp_hidden);
  }
  p.norm1 = NormParams::create(store, prefix + ".norm1", dim);
  p.wq = store.add(prefix + ".wq", {dim, dim}, InitSpec::projection(dim));
  p.wk = store.add(prefix + ".wk", {dim, dim}, InitSpec::projection(dim));
  p.wv = store.add(prefix + ".wv", {dim, dim}, InitSpec::projection(dim));
  p.norm2 = NormParams::create(store, prefix + ".norm2", dim);
  p.ffn = FeedForwardParams::create(store, prefix + ".ffn", dim, mlp_hidden);
  return p;
}

Tensor mhsa_block(const Tensor& x, const MhsaParams& p, const HeadConfig& cfg, AttentionSink* sink, int layer) {
  require_width(x, cfg.model_dim, "mhsa_block");
  const std::size_t heads = cfg.attention_heads();
  Tensor h = p.macaron_ffn ? residual_ffn(x, p.pre.norm, p.pre.ffn, 0.5) : x;
  Tensor normed = apply_layer_norm(h, p.norm1);
  Tensor q = split_heads(matmul(normed, p.wq), heads);
  Tensor k = split_heads(matmul(normed, p.wk), heads);
  Tensor v = split_heads(matmul(normed, p.wv), heads);
  Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(cfg.head_dim)));
  Tensor attn = softmax_lastdim(scores);
  record_maps(sink, attn, heads, layer, 0, AttentionKind::kMhsa);
  Tensor mixed = add(h, merge_heads(matmul(attn, v)));
  return residual_ffn(mixed, p.norm2, p.ffn, p.macaron_ffn ? 0.5 : 1.0);
}

DualQkHeadParams DualQkHeadParams::create(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
                                          std::size_t head_dim) {
  DualQkHeadParams p;
  p.wq1 = store.add(prefix + ".wq1", {in_dim, head_dim}, InitSpec::projection(in_dim));
  p.wq2 = store.add(prefix + ".wq2", {in_dim, head_dim}, InitSpec::projection(in_dim));
  p.wk1 = store.add(prefix + ".wk1", {in_dim, head_dim}, InitSpec::projection(in_dim));
  p.wk2 = store.add(prefix + ".wk2", {in_dim, head_dim}, InitSpec::projection(in_dim));
  p.wv = store.add(prefix + ".wv", {in_dim, 2 * head_dim}, InitSpec::projection(in_dim));
  p.lambda_q1 = store.add(prefix + ".lambda_q1", {head_dim}, InitSpec::zeros());
  p.lambda_k1 = store.add(prefix + ".lambda_k1", {head_dim}, InitSpec::zeros());
  p.lambda_q2 = store.add(prefix + ".lambda_q2", {head_dim}, InitSpec::zeros());
  p.lambda_k2 = store.add(prefix + ".lambda_k2", {head_dim}, InitSpec::zeros());
  return p;
}

Tensor lambda_value(const Tensor& lambda_q1, const Tensor& lambda_k1, const Tensor& lambda_q2,
                    const Tensor& lambda_k2, double lambda_init) {
  return add_scalar(sub(exp(dot(lambda_q1, lambda_k1)), exp(dot(lambda_q2, lambda_k2))), lambda_init);
}

double lambda_value(std::span<const double> lambda_q1, std::span<const double> lambda_k1,
                    std::span<const double> lambda_q2, std::span<const double> lambda_k2, double lambda_init) {
  if (lambda_q1.size() != lambda_k1.size() || lambda_q1.size() != lambda_q2.size() ||
      lambda_q1.size() != lambda_k2.size()) {
    throw DimensionError("lambda vectors must share one dimension");
  }
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < lambda_q1.size(); ++i) {
    first += lambda_q1[i] * lambda_k1[i];
    second += lambda_q2[i] * lambda_k2[i];
  }
  return std::exp(first) - std::exp(second) + lambda_init;
}

Tensor dual_qk_attention(const Tensor& x, const DualQkHeadParams& p, double lambda_init, AttentionSink* sink,
                         int layer, int head) {
  if (x.dim() != 3) throw DimensionError("dual_qk_attention: expected [B, N, in], got " + shape_str(x.shape()));
  const std::size_t d = p.wq1.size(1);
  if (p.wv.size(1) != 2 * d) throw DimensionError("dual_qk_attention: value width must be twice the head dim");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor a1 = softmax_lastdim(scale(matmul(matmul(x, p.wq1), transpose(matmul(x, p.wk1))), inv_sqrt_d));
  Tensor a2 = softmax_lastdim(scale(matmul(matmul(x, p.wq2), transpose(matmul(x, p.wk2))), inv_sqrt_d));
  Tensor lambda = lambda_value(p.lambda_q1, p.lambda_k1, p.lambda_q2, p.lambda_k2, lambda_init);
  Tensor diff = sub(a1, mul(a2, lambda));
  if (sink) {
    const double lam = lambda.item();
    record_maps(sink, a1, 1, layer, head, AttentionKind::kDmhaA1, lam);
    record_maps(sink, a2, 1, layer, head, AttentionKind::kDmhaA2, lam);
    record_maps(sink, diff, 1, layer, head, AttentionKind::kDmhaDiff, lam);
  }
  return matmul(diff, matmul(x, p.wv));
}

DmhaParams DmhaParams::create(ParameterStore& store, const std::string& prefix, const HeadConfig& cfg,
                              std::size_t mlp_hidden, bool macaron_ffn) {
  const std::size_t dim = cfg.model_dim;
  const std::size_t heads = cfg.differential_heads();
  DmhaParams p;
  p.macaron_ffn = macaron_ffn;
  if (macaron_ffn) {
    p.pre.norm = NormParams::create(store, prefix + ".pre_norm", dim);
    p.pre.ffn = FeedForwardParams::create(store, prefix + ".pre_ffn", dim, mlp_hidden);
  }
  p.norm1 = NormParams::create(store, prefix + ".norm1", dim);
  for (std::size_t h = 0; h < heads; ++h) {
    p.heads.push_back(DualQkHeadParams::create(store, prefix + ".head" + std::to_string(h), dim, cfg.head_dim));
  }
  p.head_norm_gain = store.add(prefix + ".head_norm.gain", {2 * cfg.head_dim}, InitSpec::ones());
  p.w_proj = store.add(prefix + ".w_proj", {dim, dim}, InitSpec::projection(dim));
  p.norm2 = NormParams::create(store, prefix + ".norm2", dim);
  p.ffn = FeedForwardParams::create(store, prefix + ".ffn", dim, mlp_hidden);
  return p;
}

Tensor dmha_block(const Tensor& x, const DmhaParams& p, const HeadConfig& cfg, AttentionSink* sink, int layer) {
  require_width(x, cfg.model_dim, "dmha_block");
  const std::size_t heads = cfg.differential_heads();
  if (p.heads.size() != heads) throw ConfigError("dmha_block: parameter head count does not match config");
  Tensor h = p.macaron_ffn ? residual_ffn(x, p.pre.norm, p.pre.ffn, 0.5) : x;
  Tensor normed = apply_layer_norm(h, p.norm1);
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    Tensor head = dual_qk_attention(normed, p.heads[i], cfg.lambda_init, sink, layer, static_cast<int>(i));
    outputs.push_back(scale(rms_norm(head, p.head_norm_gain, kRmsNormEps), 1.0 - cfg.lambda_init));
  }
  Tensor fused = heads == 1 ? outputs.front() : concat(outputs, -1);
  Tensor mixed = add(h, matmul(fused, p.w_proj));
  return residual_ffn(mixed, p.norm2, p.ffn, p.macaron_ffn ? 0.5 : 1.0);
}

MhcaParams MhcaParams::create(ParameterStore& store, const std::string& prefix, std::size_t dim) {
  return {store.add(prefix + ".wq", {dim, dim}, InitSpec::projection(dim)),
          store.add(prefix + ".wk", {dim, dim}, InitSpec::projection(dim)),
          store.add(prefix + ".wv", {dim, dim}, InitSpec::projection(dim)),
          store.add(prefix + ".wo", {dim, dim}, InitSpec::projection(dim))};
}

Tensor mhca(const Tensor& query, const Tensor& key_value, const MhcaParams& p, std::size_t num_heads,
            const AttentionMask* mask, AttentionSink* sink, int layer, AttentionKind kind) {
  const std::size_t dim = p.wq.size(0);
  require_width(query, dim, "mhca query");
  require_width(key_value, dim, "mhca key/value");
  if (query.size(0) != key_value.size(0)) {
    throw DimensionError("mhca: batch of query " + shape_str(query.shape()) + " differs from key/value " +
                         shape_str(key_value.shape()));
  }
  if (dim % num_heads != 0) throw ConfigError("mhca: width not divisible by head count");
  const std::size_t head_dim = dim / num_heads;
  const std::size_t rows = query.size(1), cols = key_value.size(1);
  Tensor q = split_heads(matmul(query, p.wq), num_heads);
  Tensor k = split_heads(matmul(key_value, p.wk), num_heads);
  Tensor v = split_heads(matmul(key_value, p.wv), num_heads);
  Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(head_dim)));
  Tensor attn;
  if (mask) {
    if (mask->rows != rows || mask->cols != cols) {
      throw DimensionError("mhca: mask " + std::to_string(mask->rows) + "x" + std::to_string(mask->cols) +
                           " for " + std::to_string(rows) + " queries and " + std::to_string(cols) + " keys");
    }
    mask->validate();
    attn = masked_softmax_lastdim(scores, mask->allowed, rows, cols);
  } else {
    attn = softmax_lastdim(scores);
  }
  record_maps(sink, attn, num_heads, layer, 0, kind);
  return matmul(merge_heads(matmul(attn, v)), p.wo);
}

}  // namespace otsnet
