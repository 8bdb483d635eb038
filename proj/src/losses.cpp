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

#include "otsnet/losses.hpp"

#include "otsnet/errors.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {

LossTerms loss_total(const Tensor& logits, const Tensor& sq_logits, const LabelBatch& labels, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  LossTerms out;
  Tensor vq = cross_entropy(logits, labels.decoder_target, CharVocab::kPad);
  out.vq = vq.item();
  out.total = vq;
  if (!sq_logits.defined()) return out;
  if (sq_logits.size(-1) != static_cast<std::size_t>(CharVocab::kClasses)) {
    throw DimensionError("quantizer logits must cover the " + std::to_string(CharVocab::kClasses) + " classes, got " +
                         shape_str(sq_logits.shape()));
  }
  Tensor sq = cross_entropy(sq_logits, labels.sq_target, CharVocab::kPad);
  out.sq = sq.item();
  if (alpha == 0.0) return out;
  Tensor weighted = scale(sq, alpha);
  out.weighted = weighted.item();
  out.total = add(vq, weighted);
  return out;
}

}  // namespace otsnet
