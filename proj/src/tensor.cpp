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

#include "otsnet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "otsnet/errors.hpp"

namespace otsnet {

namespace {
thread_local bool g_grad_enabled = true;

std::shared_ptr<detail::Node> leaf(const Shape& shape, std::vector<double> values) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (values.size() != shape_numel(shape)) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(values);
  return node;
}

const detail::Node& checked(const std::shared_ptr<detail::Node>& node) {
  if (!node) throw ContractError("use of an undefined tensor");
  return *node;
}
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const Shape& shape, double value) {
  return Tensor(leaf(shape, std::vector<double>(shape_numel(shape), value)));
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values) {
  return Tensor(leaf(shape, std::move(values)));
}

Tensor Tensor::scalar(double value) { return Tensor(leaf({}, {value})); }

const Shape& Tensor::shape() const { return checked(node_).shape; }

std::size_t Tensor::size(int axis) const {
  const auto& s = shape();
  const int rank = static_cast<int>(s.size());
  const int resolved = axis < 0 ? axis + rank : axis;
  if (resolved < 0 || resolved >= rank) {
    throw IndexError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  }
  return s[static_cast<std::size_t>(resolved)];
}

std::size_t Tensor::numel() const { return checked(node_).value.size(); }

std::span<const double> Tensor::data() const { return checked(node_).value; }

std::span<double> Tensor::mutable_data() {
  checked(node_);
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) {
    throw DimensionError("index rank " + std::to_string(index.size()) + " for shape " + shape_str(s));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw IndexError("index out of range for shape " + shape_str(s));
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  checked(node_);
  if (node_->backward_fn) throw ContractError("requires_grad can only be set on leaf tensors");
  node_->requires_grad = flag;
  if (!flag) node_->grad.clear();
  return *this;
}

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  checked(node_);
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(leaf(shape(), node_->value)); }

void Tensor::backward() const {
  const auto& root = checked(node_);
  if (root.value.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + shape_str(root.shape));
  }
  if (!root.requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
  for (detail::Node* node : order) {
    if (!node->backward_fn) continue;
    node->backward_fn = nullptr;
    node->inputs.clear();
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

namespace detail {

Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward) {
  for (double v : value) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.node()->requires_grad;
    if (needs) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (auto& t : inputs) node->inputs.push_back(t.node());
      node->backward_fn = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

}  // namespace detail
}  // namespace otsnet
