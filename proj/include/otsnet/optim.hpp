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

#include <cstddef>
#include <span>
#include <vector>

#include "otsnet/parameters.hpp"

namespace otsnet {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One decoupled-decay adaptive-moment update of `params` in place:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,
///   p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
/// `state` is sized on first use.
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
                const AdamWConfig& cfg, double weight_decay);

/// AdamW over every parameter of a store. Decay applies only to parameters
/// whose InitSpec requests it.
class AdamW {
 public:
  AdamW(ParameterStore& store, const AdamWConfig& cfg);

  void step(double lr);
  std::size_t steps() const { return states_.empty() ? 0 : states_.front().step; }

 private:
  ParameterStore& store_;
  AdamWConfig cfg_;
  std::vector<AdamState> states_;
};

/// Linear warmup from 0 to base_lr, then cosine decay to 0 at total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr);

/// Exponential temperature decay, floored at `end`. A zero `decay` is
/// resolved by `resolve` so that `end` is reached after the given steps.
struct TemperatureSchedule {
  double start = 1.0;
  double end = 0.5;
  double decay = 0.0;

  void validate() const;
  TemperatureSchedule resolve(std::size_t total_steps) const;
  double at(std::size_t step) const;
};

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(ParameterStore& store, double max_norm);

}  // namespace otsnet
