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

#include "otsnet/gradcheck_suite.hpp"

#include <functional>
#include <random>

#include "otsnet/errors.hpp"

#include "otsnet/losses.hpp"
#include "otsnet/ops.hpp"

namespace otsnet {
namespace {

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = normal(rng);
  return Tensor::from(shape, std::move(v));
}

Parameter input_parameter(const std::string& name, const Shape& shape, std::mt19937_64& rng) {
  Tensor t = random_tensor(shape, rng);
  t.set_requires_grad(true);
  return {name, t, InitSpec::zeros()};
}

std::vector<Parameter> with_inputs(const ParameterStore& store, std::initializer_list<Parameter> inputs) {
  std::vector<Parameter> out(inputs);
  out.insert(out.end(), store.entries().begin(), store.entries().end());
  return out;
}

}  // namespace

ModelConfig gradcheck_model_config(const ModelConfig& base) {
  ModelConfig c = base;
  c.image_height = 4;
  c.image_width = 8;
  c.channels = 1;
  c.patch_height = 2;
  c.patch_width = 4;
  c.model_dim = 8;
  c.head_dim = 4;
  c.mlp_ratio = 2;
  c.encoder_depth = 5;
  c.slots = 4;
  c.decoder_depth = 1;
  return c;
}

void jitter_parameters(ParameterStore& store, std::uint64_t seed, double scale) {
  for (auto& p : store.entries()) {
    std::mt19937_64 rng(mix_seed(seed, hash_name(p.name)));
    std::normal_distribution<double> normal(0.0, scale);
    for (double& v : p.tensor.mutable_data()) v += normal(rng);
  }
}

std::vector<GradcheckCase> run_gradcheck_suite(const ModelConfig& base, std::uint64_t seed,
                                               const GradcheckOptions& options) {
  const ModelConfig cfg = gradcheck_model_config(base);
  const HeadConfig heads = cfg.head_config();
  const std::size_t dim = cfg.model_dim, batch = 2, tokens = 3;
  std::vector<GradcheckCase> cases;
  auto check = [&](const std::string& name, const std::function<Tensor()>& loss, const std::vector<Parameter>& params) {
    try {
      cases.push_back({name, gradcheck(loss, params, options)});
    } catch (const ContractError& e) {
      throw ContractError(name + ": " + e.what());
    }
  };
  std::mt19937_64 rng(mix_seed(seed, hash_name("gradcheck")));
  // Block losses project outputs onto a fixed random direction so every
  // output component feeds the gradient.

  {
    ParameterStore store;
    const MhsaParams p = MhsaParams::create(store, "mhsa", heads, cfg.mlp_hidden(), cfg.macaron_ffn);
    store.initialize(seed);
    jitter_parameters(store, seed, 0.1);
    const Parameter x = input_parameter("mhsa.input", {batch, tokens, dim}, rng);
    const Tensor dir = random_tensor({batch, tokens, dim}, rng);
    check("mhsa_block", [&] { return sum(mul(mhsa_block(x.tensor, p, heads), dir)); },
                                             with_inputs(store, {x}));
  }
  {
    ParameterStore store;
    const DmhaParams p = DmhaParams::create(store, "dmha", heads, cfg.mlp_hidden(), cfg.macaron_ffn);
    store.initialize(seed);
    jitter_parameters(store, seed, 0.1);
    const Parameter x = input_parameter("dmha.input", {batch, tokens, dim}, rng);
    const Tensor dir = random_tensor({batch, tokens, dim}, rng);
    check("dmha_block", [&] { return sum(mul(dmha_block(x.tensor, p, heads), dir)); },
                                             with_inputs(store, {x}));
  }
  {
    ParameterStore store;
    const MhcaParams p = MhcaParams::create(store, "mhca", dim);
    store.initialize(seed);
    jitter_parameters(store, seed, 0.1);
    const Parameter q = input_parameter("mhca.query", {batch, tokens, dim}, rng);
    const Parameter kv = input_parameter("mhca.memory", {batch, tokens + 2, dim}, rng);
    const AttentionMask mask = build_mask(2, tokens);
    const Tensor dir = random_tensor({batch, tokens, dim}, rng);
    check("mhca", [&] { return sum(mul(mhca(q.tensor, kv.tensor, p, heads.attention_heads(), &mask), dir)); },
                           with_inputs(store, {q, kv}));
  }
  {
    ParameterStore store;
    const MhcaParams pam = MhcaParams::create(store, "pam", dim);
    const auto sq = SemanticQuantizerParams::create(store, "sq", dim, cfg.codebook_size);
    store.initialize(seed);
    jitter_parameters(store, seed, 0.1);
    const Parameter visual = input_parameter("sq.visual", {batch, tokens, dim}, rng);
    const Tensor slots = slot_encoding(cfg.slots, dim);
    const Tensor noise = gumbel_noise({batch, cfg.slots, cfg.codebook_size}, GumbelKey{seed, 0});
    const Tensor dir = random_tensor({batch, cfg.slots, dim}, rng);
    check("sq_chain", 
                                     [&] {
                                       Tensor focus = pam_align(slots, visual.tensor, pam, heads.attention_heads());
                                       Tensor p = gumbel_softmax(sq_project(focus, sq), 0.7, noise);
                                       return sum(mul(codebook_embed(p, sq.codebook), dir));
                                     },
                                     with_inputs(store, {visual}));
  }
  {
    ParameterStore store;
    const DecoderConfig dc = cfg.decoder_config();
    const DecoderParams p = DecoderParams::create(store, "mmcv", dc);
    store.initialize(seed);
    jitter_parameters(store, seed, 0.1);
    const Parameter visual = input_parameter("mmcv.visual", {batch, tokens, dim}, rng);
    const Parameter semantic = input_parameter("mmcv.semantic", {batch, cfg.slots, dim}, rng);
    const LabelBatch labels = LabelBatch::frame({"ab", "c"}, cfg.slots);
    check("mmcv_layer", 
                                       [&] {
                                         const FusionFeatures f = build_fusion(visual.tensor, semantic.tensor);
                                         Tensor logits = decode_train(f, labels.decoder_input, labels.length, p, dc);
                                         return cross_entropy(logits, labels.decoder_target, CharVocab::kPad);
                                       },
                                       with_inputs(store, {visual, semantic}));
  }
  {
    OtsNet model(cfg);
    model.initialize(seed);
    jitter_parameters(model.parameters(), seed, 0.05);
    std::vector<double> pixels(cfg.image_height * cfg.image_width);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (double& v : pixels) v = uniform(rng);
    const Tensor image = stack_images({&pixels}, cfg.image_height, cfg.image_width);
    const LabelBatch labels = LabelBatch::frame({"a1"}, cfg.slots);
    ForwardOptions fo;
    fo.tau = 0.8;
    fo.noise = GumbelKey{seed, 1};
    check("end_to_end", 
                                       [&] {
                                         const ForwardResult r = model.forward(image, labels, fo);
                                         return loss_total(r.logits, r.sq_logits, labels, 0.3).total;
                                       },
                                       model.parameters().entries());
  }
  return cases;
}

}  // namespace otsnet
