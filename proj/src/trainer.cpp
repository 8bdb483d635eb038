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

#include "otsnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "otsnet/errors.hpp"
#include "otsnet/losses.hpp"

namespace otsnet {

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  temperature.validate();
}

std::size_t TrainConfig::steps_per_epoch(std::size_t samples) const {
  return (samples + batch_size - 1) / batch_size;
}

void write_log_header(std::ostream& out) { out << "step,epoch,lr,l_vq,l_sq,total,tau,grad_norm\n"; }

void write_log_line(std::ostream& out, const StepLog& log) {
  const auto old = out.precision(17);
  out << log.step << ',' << log.epoch << ',' << log.lr << ',' << log.vq << ',' << log.sq << ',' << log.total << ','
      << log.tau << ',' << log.grad_norm << '\n';
  out.precision(old);
}

std::size_t frame_length(const std::vector<std::string>& texts, std::size_t slots) {
  std::size_t longest = 0;
  for (const auto& t : texts) longest = std::max(longest, t.size());
  return std::min(slots, longest + 1);
}

namespace {

std::vector<double> augment_image(const SyntheticSample& s, const ModelConfig& model, const TrainConfig& cfg,
                                  std::size_t epoch, std::size_t index) {
  std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed ^ 0xa5a5a5a5ULL, epoch), index));
  std::uniform_real_distribution<double> angle(-cfg.augment_rotation_deg, cfg.augment_rotation_deg);
  std::vector<double> img = rotate_image(s.image, model.image_height, model.image_width, angle(rng));
  if (cfg.augment_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.augment_noise);
    for (double& v : img) v = std::clamp(v + noise(rng), 0.0, 1.0);
  }
  return img;
}

}  // namespace

std::vector<StepLog> train(OtsNet& model, const std::vector<SyntheticSample>& data, const TrainConfig& cfg,
                           const TrainHooks& hooks) {
  cfg.validate();
  if (data.empty()) throw ConfigError("training corpus is empty");
  const ModelConfig& mc = model.config();
  const std::size_t per_epoch = cfg.steps_per_epoch(data.size());
  const std::size_t total = cfg.total_steps(data.size());
  const auto warmup = static_cast<std::size_t>(std::floor(cfg.warmup_fraction * static_cast<double>(total)));
  const TemperatureSchedule tau = cfg.temperature.resolve(total);
  AdamW optimizer(model.parameters(), {0.9, 0.999, 1e-8, cfg.weight_decay});
  const std::uint64_t noise_seed = mix_seed(cfg.seed, hash_name("gumbel"));

  std::vector<StepLog> logs;
  logs.reserve(total);
  std::vector<std::size_t> order(data.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(mix_seed(mix_seed(cfg.seed, hash_name("shuffle")), epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t b = 0; b < per_epoch; ++b, ++step) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(data.size(), begin + cfg.batch_size);
      std::vector<std::string> texts;
      std::vector<std::vector<double>> augmented;
      std::vector<const std::vector<double>*> images;
      augmented.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = data[order[i]];
        texts.push_back(s.text);
        if (cfg.augment) {
          augmented.push_back(augment_image(s, mc, cfg, epoch, order[i]));
          images.push_back(&augmented.back());
        } else {
          images.push_back(&s.image);
        }
      }
      StepLog log;
      log.step = step;
      log.epoch = epoch;
      log.lr = lr_schedule(step + 1, total, warmup, cfg.learning_rate);
      log.tau = tau.at(step);
      try {
        const LabelBatch labels = LabelBatch::frame(texts, frame_length(texts, mc.slots));
        ForwardOptions options;
        options.tau = log.tau;
        options.noise = GumbelKey{noise_seed, step};
        const ForwardResult out = model.forward(stack_images(images, mc.image_height, mc.image_width), labels, options);
        const LossTerms loss = loss_total(out.logits, out.sq_logits, labels, cfg.alpha);
        log.vq = loss.vq;
        log.sq = loss.sq;
        log.total = loss.total.item();
        model.parameters().zero_grad();
        loss.total.backward();
        log.grad_norm = clip_grad_norm(model.parameters(), cfg.clip_norm);
        if (!std::isfinite(log.grad_norm)) throw NumericError("non-finite gradient norm");
        optimizer.step(log.lr);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) + ": " + e.what());
      }
      logs.push_back(log);
      if (hooks.on_step) hooks.on_step(log);
    }
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1);
  }
  return logs;
}

}  // namespace otsnet
