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
#include <functional>
#include <iosfwd>
#include <vector>

#include "otsnet/model.hpp"
#include "otsnet/optim.hpp"
#include "otsnet/synth.hpp"

namespace otsnet {

struct TrainConfig {
  double alpha = 0.3;
  std::size_t batch_size = 32;
  double learning_rate = 5e-4;
  double weight_decay = 0.05;
  double warmup_fraction = 0.075;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  TemperatureSchedule temperature;
  // Per-epoch random rotation and pixel noise on top of the stored rasters.
  bool augment = false;
  double augment_rotation_deg = 10.0;
  double augment_noise = 0.05;
  double clip_norm = 1.0;  // <= 0 disables clipping

  void validate() const;
  std::size_t steps_per_epoch(std::size_t samples) const;
  std::size_t total_steps(std::size_t samples) const { return epochs * steps_per_epoch(samples); }
};

struct StepLog {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double vq = 0.0;
  double sq = 0.0;
  double total = 0.0;
  double tau = 0.0;
  double grad_norm = 0.0;
};

/// Delimited step log: header, then one line per step.
void write_log_header(std::ostream& out);
void write_log_line(std::ostream& out, const StepLog& log);

struct TrainHooks {
  std::function<void(const StepLog&)> on_step;
  // Called after each epoch with the 1-based epoch number.
  std::function<void(std::size_t)> on_epoch;
};

/// Teacher-forced AdamW training. Every source of randomness (shuffle order,
/// Gumbel noise, augmentation) is keyed on cfg.seed, so two runs with the same
/// inputs produce identical parameters. A non-finite value aborts with a
/// NumericError naming the step.
std::vector<StepLog> train(OtsNet& model, const std::vector<SyntheticSample>& data, const TrainConfig& cfg,
                           const TrainHooks& hooks = {});

/// Shortest teacher-forcing frame covering every label plus EOS.
std::size_t frame_length(const std::vector<std::string>& texts, std::size_t slots);

}  // namespace otsnet
