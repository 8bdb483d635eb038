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

// Differentiable tensor operations. Every op validates shapes, computes its
// forward value eagerly and, when a gradient is needed, records a backward
// closure on the result.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otsnet/tensor.hpp"

namespace otsnet {

/// Batched matrix product: [..., m, k] x [..., k, n] -> [..., m, n].
/// Batch prefixes broadcast with numpy rules.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with numpy broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor exp(const Tensor& a);
/// Exact (erf) GELU.
Tensor gelu(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// sum(a * b) for equal shapes.
Tensor dot(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& a, const Shape& shape);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& order);
/// Swaps the last two axes.
Tensor transpose(const Tensor& a);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, std::size_t start, std::size_t length);

/// Softmax over the last axis, max-shifted.
Tensor softmax_lastdim(const Tensor& x);

/// Softmax over the last axis where `allowed` (rows x cols, row-major,
/// broadcast over all leading axes) selects visible logits. Hidden logits
/// behave as -inf: probability exactly 0 and no gradient. A row with no
/// allowed entry is a ContractError.
Tensor masked_softmax_lastdim(const Tensor& x, std::span<const std::uint8_t> allowed,
                              std::size_t rows, std::size_t cols);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
/// x / sqrt(mean(x^2) + eps) * gain over the last axis; no centering.
Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps);

/// Mean negative log-softmax of the target class over rows whose target is
/// not `ignore_id`. Returns 0 with zero gradient when every row is ignored.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_id);

/// Row gather: table [V, D], ids with `index_shape` -> index_shape + [D].
Tensor embedding(const Tensor& table, std::span<const int> ids, const Shape& index_shape);

}  // namespace otsnet
