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

#include "otsnet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otsnet/errors.hpp"

namespace otsnet {

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
                const AdamWConfig& cfg, double weight_decay) {
  if (params.size() != grads.size()) throw DimensionError("adamw_step: parameter and gradient sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw DimensionError("adamw_step: optimizer state size changed");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    // With beta = 0 the correction is 1 and the moments are the raw gradient.
    const double m_hat = c1 > 0.0 ? state.m[i] / c1 : state.m[i];
    const double v_hat = c2 > 0.0 ? state.v[i] / c2 : state.v[i];
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + weight_decay * params[i]);
  }
}

AdamW::AdamW(ParameterStore& store, const AdamWConfig& cfg)
    : store_(store), cfg_(cfg), states_(store.entries().size()) {}

void AdamW::step(double lr) {
  auto& entries = store_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& p = entries[i];
    const double wd = p.init.decay ? cfg_.weight_decay : 0.0;
    std::span<const double> grad = p.tensor.mutable_grad();
    adamw_step(p.tensor.mutable_data(), grad, states_[i], lr, cfg_, wd);
  }
}

double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr) {
  if (step > total_steps) throw IndexError("lr_schedule: step past the end of training");
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (total_steps <= warmup_steps) return base_lr;
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void TemperatureSchedule::validate() const {
  if (!(end > 0.0) || !(start >= end)) throw ConfigError("temperature schedule needs tau_start >= tau_end > 0");
  if (decay < 0.0 || decay > 1.0) throw ConfigError("temperature decay must lie in [0, 1]");
}

TemperatureSchedule TemperatureSchedule::resolve(std::size_t total_steps) const {
  validate();
  TemperatureSchedule out = *this;
  if (out.decay == 0.0) {
    out.decay = total_steps == 0 ? 1.0 : std::pow(end / start, 1.0 / static_cast<double>(total_steps));
  }
  return out;
}

double TemperatureSchedule::at(std::size_t step) const {
  if (decay == 0.0) throw ContractError("temperature schedule used before resolve()");
  return std::max(end, start * std::pow(decay, static_cast<double>(step)));
}

double clip_grad_norm(ParameterStore& store, double max_norm) {
  double total = 0.0;
  for (const auto& p : store.entries()) {
    for (double g : p.tensor.grad()) total += g * g;
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : store.entries()) {
      for (double& g : p.tensor.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace otsnet
