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

#include "otsnet/tensor.hpp"
#include "otsnet/vocab.hpp"

namespace otsnet {

struct LossTerms {
  Tensor total;         // scalar, differentiable
  double vq = 0.0;      // recognition cross-entropy
  double sq = 0.0;      // quantizer cross-entropy (0 without SQ logits)
  double weighted = 0.0;  // alpha * sq as added to the total
};

/// L = L_vq + alpha * L_sq. L_vq scores decoder logits against characters
/// followed by EOS; L_sq scores slot logits against the character at the same
/// slot. PAD positions are ignored by both. An undefined `sq_logits` or
/// alpha == 0 leaves total equal to L_vq.
LossTerms loss_total(const Tensor& logits, const Tensor& sq_logits, const LabelBatch& labels, double alpha);

}  // namespace otsnet
