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

// Naive reference implementations used as test oracles. Everything here is
// written with explicit loops over plain row-major matrices, accumulates in
// long double, and shares no code with the library kernels.

#include <cstdint>
#include <random>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/tensor.hpp"

namespace oracle {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// Matrix view of a 2-D tensor, or of batch element `b` of a 3-D tensor.
Mat of(const otsnet::Tensor& t);
Mat of(const otsnet::Tensor& t, std::size_t b);
std::vector<double> vec(const otsnet::Tensor& t);

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat add_row(const Mat& a, const std::vector<double>& row);
Mat scale(const Mat& a, double s);
Mat columns(const Mat& a, std::size_t start, std::size_t count);
Mat hconcat(const std::vector<Mat>& parts);

// Row softmax; `allowed` (rows x cols, optional) hides entries.
Mat softmax_rows(const Mat& x, const std::vector<std::uint8_t>* allowed = nullptr);
Mat layer_norm(const Mat& x, const std::vector<double>& gain, const std::vector<double>& bias, double eps);
Mat rms_norm(const Mat& x, const std::vector<double>& gain, double eps);
Mat gelu(const Mat& x);
Mat feed_forward(const Mat& x, const otsnet::FeedForwardParams& p);

double lambda_value(const std::vector<double>& q1, const std::vector<double>& k1, const std::vector<double>& q2,
                    const std::vector<double>& k2, double lambda_init);

struct DualQkTrace {
  Mat a1, a2, diff, out;
  double lambda = 0.0;
};
DualQkTrace dual_qk(const Mat& x, const otsnet::DualQkHeadParams& p, double lambda_init);

Mat mhsa_block(const Mat& x, const otsnet::MhsaParams& p, const otsnet::HeadConfig& cfg);
Mat dmha_block(const Mat& x, const otsnet::DmhaParams& p, const otsnet::HeadConfig& cfg);
Mat mhca(const Mat& query, const Mat& kv, const otsnet::MhcaParams& p, std::size_t heads,
         const std::vector<std::uint8_t>* allowed = nullptr);

Mat codebook_embed(const Mat& p, const Mat& codebook);
Mat gumbel_softmax(const Mat& q, const Mat& noise, double tau);
// Visibility predicate j <= N + i over T x (N + T), 0-based.
std::vector<std::uint8_t> cross_mask(std::size_t visual, std::size_t slots);
std::size_t edit_distance(const std::string& a, const std::string& b);

double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

// Helpers for building random instances.
otsnet::Tensor random_tensor(const otsnet::Shape& shape, std::mt19937_64& rng, double scale = 1.0);
// Adds N(0, scale) noise to every parameter so zero-initialised entries
// (biases, lambda vectors) take generic values.
void perturb(otsnet::ParameterStore& store, std::uint64_t seed, double scale);

}  // namespace oracle
