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
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace otsnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node;
using BackwardFn = std::function<void(Node&)>;

// One vertex of the dynamic computation graph. Leaves (parameters, inputs)
// have no backward function; interior nodes own their inputs until the
// graph is consumed by Tensor::backward().
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward_fn;

  // Lazily allocated gradient accumulator.
  std::span<double> grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major double tensor with an optional gradient accumulator.
//
// Tensor is a cheap shared handle: copies alias the same storage, which is
// how parameters are shared between a module and its ParameterStore.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double value);
  static Tensor from(const Shape& shape, std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  // Negative axes count from the back.
  std::size_t size(int axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct write access, for initialization and tests. Never call while a
  // graph that reads this tensor is pending backward.
  std::span<double> mutable_data();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // New leaf holding a copy of the values; gradient does not flow through.
  Tensor detach() const;
  // Reverse-mode sweep from a scalar. Accumulates into every reachable leaf
  // with requires_grad, then releases the interior graph.
  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Disables graph construction in the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

// Builds an op result. `backward` is attached only when some input needs a
// gradient and grad mode is on. Throws NumericError on non-finite values.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace detail

}  // namespace otsnet
