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

#include "otsnet/thinking.hpp"

#include <cmath>

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {

Tensor slot_encoding(std::size_t slots, std::size_t dim) {
  std::vector<double> table(slots * dim);
  for (std::size_t t = 0; t < slots; ++t) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double exponent = static_cast<double>(2 * (c / 2)) / static_cast<double>(dim);
      const double angle = static_cast<double>(t) / std::pow(10000.0, exponent);
      table[t * dim + c] = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::from({slots, dim}, std::move(table));
}

Tensor pam_align(const Tensor& slot_queries, const Tensor& visual, const MhcaParams& params, std::size_t num_heads,
                 AttentionSink* sink, int layer) {
  if (visual.dim() != 3) throw DimensionError("pam_align: visual features must be [B, N, D]");
  Tensor queries = slot_queries;
  if (queries.dim() == 2) {
    // Shared table: replicate per batch element.
    const std::size_t batch = visual.size(0);
    std::vector<double> tiled;
    tiled.reserve(batch * queries.numel());
    for (std::size_t b = 0; b < batch; ++b) tiled.insert(tiled.end(), queries.data().begin(), queries.data().end());
    queries = Tensor::from({batch, queries.size(0), queries.size(1)}, std::move(tiled));
  }
  return mhca(queries, visual, params, num_heads, nullptr, sink, layer, AttentionKind::kMhca);
}

SemanticQuantizerParams SemanticQuantizerParams::create(ParameterStore& store, const std::string& prefix,
                                                        std::size_t dim, std::size_t units) {
  return {store.add(prefix + ".phi.weight", {dim, units}, InitSpec::projection(dim)),
          store.add(prefix + ".phi.bias", {units}, InitSpec::zeros()),
          store.add(prefix + ".codebook", {units, dim}, InitSpec::projection(units))};
}

Tensor sq_project(const Tensor& focus, const SemanticQuantizerParams& params) {
  return add(matmul(focus, params.phi_weight), params.phi_bias);
}

double gumbel_sample(const GumbelKey& key, std::size_t batch, std::size_t slot, std::size_t unit) {
  std::uint64_t h = mix_seed(key.seed, key.step);
  h = mix_seed(h, batch);
  h = mix_seed(h, slot);
  h = mix_seed(h, unit);
  // 53 random bits mapped strictly inside (0, 1).
  const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(-std::log(u));
}

Tensor gumbel_noise(const Shape& shape, const GumbelKey& key, std::size_t batch_offset) {
  if (shape.size() != 3) throw DimensionError("gumbel_noise expects [B, T, C], got " + shape_str(shape));
  std::vector<double> values(shape_numel(shape));
  std::size_t i = 0;
  for (std::size_t b = 0; b < shape[0]; ++b) {
    for (std::size_t t = 0; t < shape[1]; ++t) {
      for (std::size_t c = 0; c < shape[2]; ++c) values[i++] = gumbel_sample(key, batch_offset + b, t, c);
    }
  }
  return Tensor::from(shape, std::move(values));
}

Tensor gumbel_softmax(const Tensor& logits, double tau, const Tensor& noise) {
  if (!(tau > 0.0)) throw ContractError("gumbel_softmax: temperature must be positive, got " + std::to_string(tau));
  Tensor perturbed = noise.defined() ? add(logits, noise) : logits;
  return softmax_lastdim(scale(perturbed, 1.0 / tau));
}

std::vector<int> hard_quantize(const Tensor& logits) {
  const std::size_t units = logits.size(-1);
  const std::size_t rows = logits.numel() / units;
  const auto v = logits.data();
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < units; ++c) {
      if (v[r * units + c] > v[r * units + best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

Tensor hard_one_hot(const Tensor& logits) {
  const std::size_t units = logits.size(-1);
  const auto index = hard_quantize(logits);
  std::vector<double> values(logits.numel(), 0.0);
  for (std::size_t r = 0; r < index.size(); ++r) values[r * units + static_cast<std::size_t>(index[r])] = 1.0;
  return Tensor::from(logits.shape(), std::move(values));
}

Tensor codebook_embed(const Tensor& distribution, const Tensor& codebook) {
  if (codebook.dim() != 2 || distribution.size(-1) != codebook.size(0)) {
    throw DimensionError("codebook_embed: distribution " + shape_str(distribution.shape()) + " vs codebook " +
                         shape_str(codebook.shape()));
  }
  const std::size_t units = codebook.size(0);
  const auto p = distribution.data();
  for (std::size_t r = 0; r < p.size() / units; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < units; ++c) total += p[r * units + c];
    if (std::abs(total - 1.0) > 1e-6) {
      throw ContractError("codebook_embed: row " + std::to_string(r) + " sums to " + std::to_string(total));
    }
  }
  return matmul(distribution, codebook);
}

SqMode parse_sq_mode(const std::string& name) {
  if (name == "none") return SqMode::kNone;
  if (name == "normal") return SqMode::kNormal;
  if (name == "detach") return SqMode::kDetach;
  if (name == "gumbel") return SqMode::kGumbel;
  throw ConfigError("unknown sq mode '" + name + "' (expected none, normal, detach or gumbel)");
}

const char* sq_mode_name(SqMode mode) {
  switch (mode) {
    case SqMode::kNone: return "none";
    case SqMode::kNormal: return "normal";
    case SqMode::kDetach: return "detach";
    case SqMode::kGumbel: return "gumbel";
  }
  return "unknown";
}

Tensor sq_distribution(const Tensor& logits, SqMode mode, const QuantizeOptions& options) {
  switch (mode) {
    case SqMode::kNormal:
      return softmax_lastdim(logits);
    case SqMode::kDetach:
      return softmax_lastdim(logits.detach());
    case SqMode::kGumbel:
      if (options.hard) return hard_one_hot(logits);
      if (options.noise) return gumbel_softmax(logits, options.tau, gumbel_noise(logits.shape(), *options.noise));
      return gumbel_softmax(logits, options.tau);
    case SqMode::kNone:
      break;
  }
  throw ContractError("sq_distribution called without a quantizer");
}

}  // namespace otsnet
