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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "otsnet/errors.hpp"
#include "otsnet/gradcheck.hpp"
#include "otsnet/ops.hpp"
#include "otsnet/thinking.hpp"

using namespace otsnet;

TEST_CASE("slot_encoding follows the sinusoid table") {
  Tensor table = slot_encoding(25, 64);
  CHECK(table.shape() == Shape{25, 64});
  for (std::size_t t = 0; t < 25; ++t) {
    for (std::size_t i = 0; i < 32; ++i) {
      const double angle = static_cast<double>(t) / std::pow(10000.0, 2.0 * static_cast<double>(i) / 64.0);
      CHECK(table.at({t, 2 * i}) == doctest::Approx(std::sin(angle)).epsilon(1e-14));
      CHECK(table.at({t, 2 * i + 1}) == doctest::Approx(std::cos(angle)).epsilon(1e-14));
    }
  }
  CHECK(oracle::vec(slot_encoding(25, 64)) == oracle::vec(table));
}

TEST_CASE("pam_align: output shape, single visual token and key permutation") {
  const std::size_t dim = 16;
  ParameterStore store;
  MhcaParams p = MhcaParams::create(store, "pam", dim);
  store.initialize(1);
  std::mt19937_64 rng(1);
  Tensor slots = slot_encoding(25, dim);
  CHECK(pam_align(slots, oracle::random_tensor({2, 6, dim}, rng), p, 4).shape() == Shape{2, 25, dim});

  Tensor single = oracle::random_tensor({1, 1, dim}, rng);
  const oracle::Mat value = oracle::matmul(oracle::matmul(oracle::of(single, 0), oracle::of(p.wv)), oracle::of(p.wo));
  const oracle::Mat fu = oracle::of(pam_align(slots, single, p, 4), 0);
  for (std::size_t t = 0; t < 25; ++t)
    for (std::size_t c = 0; c < dim; ++c) CHECK(fu(t, c) == doctest::Approx(value(0, c)).epsilon(1e-13));

  Tensor visual = oracle::random_tensor({1, 5, dim}, rng);
  std::vector<double> reversed;
  for (std::size_t s = 5; s-- > 0;)
    reversed.insert(reversed.end(), visual.data().begin() + s * dim, visual.data().begin() + (s + 1) * dim);
  CHECK(oracle::max_abs_diff(oracle::vec(pam_align(slots, visual, p, 4)),
                             oracle::vec(pam_align(slots, Tensor::from({1, 5, dim}, reversed), p, 4))) < 1e-10);
}

TEST_CASE("sq_project is the affine map D -> C") {
  ParameterStore store;
  SemanticQuantizerParams p = SemanticQuantizerParams::create(store, "sq", 8, 8);
  std::mt19937_64 rng(2);
  Tensor fu = oracle::random_tensor({2, 3, 8}, rng);
  for (double v : oracle::vec(sq_project(fu, p))) CHECK(v == 0.0);
  {
    Tensor w = p.phi_weight;
    auto d = w.mutable_data();
    for (std::size_t i = 0; i < 8; ++i) d[i * 8 + i] = 1.0;
  }
  CHECK(oracle::vec(sq_project(fu, p)) == oracle::vec(fu));
  store.initialize(3);
  oracle::perturb(store, 4, 0.5);
  for (std::size_t b = 0; b < 2; ++b) {
    const oracle::Mat expected = oracle::add_row(oracle::matmul(oracle::of(fu, b), oracle::of(p.phi_weight)),
                                                 oracle::vec(p.phi_bias));
    CHECK(oracle::max_abs_diff(oracle::of(sq_project(fu, p), b), expected) < 1e-12);
  }
}

TEST_CASE("gumbel_softmax: worked examples") {
  Tensor uniform = Tensor::full({1, 2, 5}, 0.7);
  for (double tau : {0.1, 1.0, 3.0})
    for (double v : oracle::vec(gumbel_softmax(uniform, tau))) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(gumbel_softmax(uniform, 0.0), ContractError);
  CHECK_THROWS_AS(gumbel_softmax(uniform, -1.0), ContractError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor q = oracle::random_tensor({1, 3, 7}, rng);
    Tensor g = gumbel_noise({1, 3, 7}, GumbelKey{static_cast<std::uint64_t>(trial), 0});
    const auto hard = oracle::vec(gumbel_softmax(q, 1e-6, g));
    const auto index = hard_quantize(add(q, g));
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 7; ++c)
        CHECK(std::abs(hard[r * 7 + c] - (static_cast<int>(c) == index[r] ? 1.0 : 0.0)) <= 1e-6);
    CHECK(oracle::max_abs_diff(oracle::of(gumbel_softmax(q, 1.0, g), 0),
                               oracle::softmax_rows(oracle::add(oracle::of(q, 0), oracle::of(g, 0)))) < 1e-12);
    CHECK(oracle::max_abs_diff(oracle::of(gumbel_softmax(q, 0.37, g), 0),
                               oracle::gumbel_softmax(oracle::of(q, 0), oracle::of(g, 0), 0.37)) < 1e-12);
  }
}

TEST_CASE("gumbel_softmax: rows sum to one and sharpen monotonically as tau falls") {
  std::mt19937_64 rng(6);
  const std::vector<double> taus{10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001};
  for (int trial = 0; trial < 50; ++trial) {
    Tensor q = oracle::random_tensor({1, 2, 9}, rng, 2.0);
    Tensor g = gumbel_noise({1, 2, 9}, GumbelKey{99, static_cast<std::uint64_t>(trial)});
    std::vector<double> previous_max(2, 0.0);
    for (double tau : taus) {
      const auto p = oracle::vec(gumbel_softmax(q, tau, g));
      for (std::size_t r = 0; r < 2; ++r) {
        double total = 0.0, top = 0.0;
        for (std::size_t c = 0; c < 9; ++c) {
          total += p[r * 9 + c];
          top = std::max(top, p[r * 9 + c]);
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
        CHECK(top >= previous_max[r] - 1e-15);
        previous_max[r] = top;
      }
    }
  }
}

TEST_CASE("gumbel noise is keyed, reproducible and standard Gumbel") {
  const GumbelKey key{7, 3};
  CHECK(gumbel_sample(key, 1, 2, 3) == gumbel_sample(key, 1, 2, 3));
  CHECK(gumbel_sample(key, 1, 2, 3) != gumbel_sample(GumbelKey{7, 4}, 1, 2, 3));
  CHECK(gumbel_sample(key, 1, 2, 3) != gumbel_sample(key, 2, 2, 3));
  Tensor shifted = gumbel_noise({2, 2, 3}, key, 5);
  CHECK(shifted.at({1, 0, 2}) == gumbel_sample(key, 6, 0, 2));
  double mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) mean += gumbel_sample(GumbelKey{11, 0}, static_cast<std::size_t>(i), 0, 0);
  mean /= n;
  // Mean of Gumbel(0, 1) is the Euler-Mascheroni constant; sd is pi/sqrt(6).
  CHECK(std::abs(mean - 0.5772156649) < 4.0 * (M_PI / std::sqrt(6.0)) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("hard_quantize picks the lowest index among maxima") {
  CHECK(hard_quantize(Tensor::from({3}, {0.1, 0.9, 0.3})) == std::vector<int>{1});
  CHECK(hard_quantize(Tensor::full({4}, 2.0)) == std::vector<int>{0});
  CHECK(hard_quantize(Tensor::from({2, 3}, {1, 5, 5, 7, 7, 1})) == std::vector<int>{1, 0});
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor q = oracle::random_tensor({4, 11}, rng);
    const auto got = hard_quantize(q);
    for (std::size_t r = 0; r < 4; ++r) {
      std::size_t best = 0;
      for (std::size_t c = 0; c < 11; ++c)
        if (q.at({r, c}) > q.at({r, best})) best = c;
      CHECK(got[r] == static_cast<int>(best));
    }
  }
  CHECK(oracle::vec(hard_one_hot(Tensor::from({1, 3}, {0.1, 0.9, 0.3}))) == std::vector<double>{0, 1, 0});
}

TEST_CASE("codebook_embed: selection, mean and weighted sum") {
  std::mt19937_64 rng(9);
  Tensor e = oracle::random_tensor({5, 4}, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<double> p(5, 0.0);
    p[i] = 1.0;
    const auto row = oracle::vec(codebook_embed(Tensor::from({1, 5}, p), e));
    for (std::size_t c = 0; c < 4; ++c) CHECK(row[c] == e.at({i, c}));
  }
  const auto mean_row = oracle::vec(codebook_embed(Tensor::full({1, 5}, 0.2), e));
  for (std::size_t c = 0; c < 4; ++c) {
    double m = 0.0;
    for (std::size_t i = 0; i < 5; ++i) m += e.at({i, c});
    CHECK(mean_row[c] == doctest::Approx(m / 5).epsilon(1e-14));
  }
  for (int trial = 0; trial < 50; ++trial) {
    Tensor p = softmax_lastdim(oracle::random_tensor({1, 3, 5}, rng, 2.0));
    CHECK(oracle::max_abs_diff(oracle::of(codebook_embed(p, e), 0), oracle::codebook_embed(oracle::of(p, 0), oracle::of(e))) <
          1e-12);
  }
  CHECK_THROWS_AS(codebook_embed(Tensor::full({1, 5}, 0.3), e), ContractError);
  CHECK_THROWS_AS(codebook_embed(Tensor::full({1, 4}, 0.25), e), DimensionError);
}

TEST_CASE("sq variants: gumbel with zero noise equals normal; detach blocks the codebook path") {
  ParameterStore store;
  SemanticQuantizerParams p = SemanticQuantizerParams::create(store, "sq", 6, 5);
  store.initialize(10);
  oracle::perturb(store, 11, 0.2);
  std::mt19937_64 rng(12);
  Tensor fu = oracle::random_tensor({2, 3, 6}, rng);
  Tensor probe = oracle::random_tensor({2, 3, 6}, rng);
  Tensor q = sq_project(fu, p);
  QuantizeOptions opts;
  opts.tau = 1.0;
  CHECK(oracle::vec(sq_distribution(q, SqMode::kGumbel, opts)) == oracle::vec(sq_distribution(q, SqMode::kNormal, opts)));
  CHECK(oracle::vec(sq_distribution(q, SqMode::kDetach, opts)) == oracle::vec(sq_distribution(q, SqMode::kNormal, opts)));
  CHECK_THROWS_AS(sq_distribution(q, SqMode::kNone, opts), ContractError);
  opts.hard = true;
  CHECK(oracle::vec(sq_distribution(q, SqMode::kGumbel, opts)) == oracle::vec(hard_one_hot(q)));

  auto phi_grad_norm = [&](SqMode mode) {
    store.zero_grad();
    QuantizeOptions o;
    Tensor fq = codebook_embed(sq_distribution(sq_project(fu, p), mode, o), p.codebook);
    sum(mul(fq, probe)).backward();
    double n = 0.0;
    for (double g : p.phi_weight.grad()) n += g * g;
    return n;
  };
  CHECK(phi_grad_norm(SqMode::kNormal) > 0.0);
  CHECK(phi_grad_norm(SqMode::kDetach) == 0.0);
  CHECK(parse_sq_mode("gumbel") == SqMode::kGumbel);
  CHECK_THROWS_AS(parse_sq_mode("vq"), ConfigError);
}

TEST_CASE("PAM -> SQ -> Gumbel-Softmax -> codebook passes gradcheck with frozen noise") {
  const std::size_t dim = 8;
  ParameterStore store;
  MhcaParams pam = MhcaParams::create(store, "pam", dim);
  SemanticQuantizerParams sq = SemanticQuantizerParams::create(store, "sq", dim, 6);
  store.initialize(13);
  oracle::perturb(store, 14, 0.1);
  std::mt19937_64 rng(15);
  Tensor visual = oracle::random_tensor({2, 4, dim}, rng);
  Tensor probe = oracle::random_tensor({2, 3, dim}, rng);
  QuantizeOptions opts{0.7, GumbelKey{3, 1}, false};
  auto loss = [&] {
    Tensor fu = pam_align(slot_encoding(3, dim), visual, pam, 2);
    return sum(mul(codebook_embed(sq_distribution(sq_project(fu, sq), SqMode::kGumbel, opts), sq.codebook), probe));
  };
  const auto report = gradcheck(loss, store.entries());
  INFO(report.worst());
  CHECK(report.passed);
}
