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

#include "otsnet/ops.hpp"

// Route every product through the packed kernel so the summation order
// never depends on operand alignment.
#define EIGEN_GEMM_TO_COEFFBASED_THRESHOLD 0
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "otsnet/errors.hpp"

namespace otsnet {

using detail::make_result;
using detail::Node;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

Node& input(Node& self, std::size_t i) { return *self.inputs[i]; }

std::size_t resolve_axis(int axis, std::size_t rank, const char* op) {
  const int r = static_cast<int>(rank);
  const int resolved = axis < 0 ? axis + r : axis;
  if (resolved < 0 || resolved >= r) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(rank));
  }
  return static_cast<std::size_t>(resolved);
}

Shape broadcast_shapes(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    }
    out[i] = std::max(ea, eb);
  }
  return out;
}

// Maps each flat index of `out` to the flat index of `from` under
// broadcasting. Empty result means identity.
std::vector<std::size_t> broadcast_index(const Shape& from, const Shape& out) {
  if (from == out) return {};
  const std::size_t rank = out.size();
  const std::size_t offset = rank - from.size();
  std::vector<std::size_t> stride(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = rank; i-- > offset;) {
    const std::size_t extent = from[i - offset];
    stride[i] = extent == 1 ? 0 : s;
    s *= extent;
  }
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    map[k] = flat;
    for (std::size_t i = rank; i-- > 0;) {
      ++counter[i];
      flat += stride[i];
      if (counter[i] < out[i]) break;
      flat -= stride[i] * counter[i];
      counter[i] = 0;
    }
  }
  return map;
}

inline std::size_t at_map(const std::vector<std::size_t>& map, std::size_t k) {
  return map.empty() ? k : map[k];
}

Shape strides_of(const Shape& shape) {
  Shape strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

enum class Binary { kAdd, kSub, kMul };

Tensor binary(const char* op, Binary kind, const Tensor& a, const Tensor& b) {
  Shape out_shape = broadcast_shapes(a.shape(), b.shape(), op);
  auto amap = broadcast_index(a.shape(), out_shape);
  auto bmap = broadcast_index(b.shape(), out_shape);
  const auto av = a.data();
  const auto bv = b.data();
  const std::size_t n = shape_numel(out_shape);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = av[at_map(amap, k)];
    const double y = bv[at_map(bmap, k)];
    switch (kind) {
      case Binary::kAdd: out[k] = x + y; break;
      case Binary::kSub: out[k] = x - y; break;
      case Binary::kMul: out[k] = x * y; break;
    }
  }
  return make_result(op, std::move(out_shape), std::move(out), {a, b},
                     [kind, amap = std::move(amap), bmap = std::move(bmap)](Node& self) {
                       Node& na = input(self, 0);
                       Node& nb = input(self, 1);
                       const auto& g = self.grad;
                       const std::size_t n = g.size();
                       if (na.requires_grad) {
                         auto ga = na.grad_buffer();
                         for (std::size_t k = 0; k < n; ++k) {
                           const double factor = kind == Binary::kMul ? nb.value[at_map(bmap, k)] : 1.0;
                           ga[at_map(amap, k)] += g[k] * factor;
                         }
                       }
                       if (nb.requires_grad) {
                         auto gb = nb.grad_buffer();
                         for (std::size_t k = 0; k < n; ++k) {
                           double factor = 1.0;
                           if (kind == Binary::kSub) factor = -1.0;
                           if (kind == Binary::kMul) factor = na.value[at_map(amap, k)];
                           gb[at_map(bmap, k)] += g[k] * factor;
                         }
                       }
                     });
}

void require_same_last(const Tensor& x, const Tensor& p, const char* op, const char* what) {
  if (p.dim() != 1 || p.size(0) != x.size(-1)) {
    throw DimensionError(std::string(op) + ": " + what + " shape " + shape_str(p.shape()) +
                         " does not match last extent of " + shape_str(x.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.dim() < 2 || b.dim() < 2) {
    throw DimensionError("matmul needs rank >= 2 operands, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.size(-2), k = a.size(-1), n = b.size(-1);
  if (b.size(-2) != k) {
    throw DimensionError("matmul: inner extents differ for " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  const Shape abatch(a.shape().begin(), a.shape().end() - 2);
  const Shape bbatch(b.shape().begin(), b.shape().end() - 2);
  Shape obatch;
  try {
    obatch = broadcast_shapes(abatch, bbatch, "matmul");
  } catch (const DimensionError&) {
    throw DimensionError("matmul: batch prefixes of " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " do not broadcast");
  }
  auto amap = broadcast_index(abatch, obatch);
  auto bmap = broadcast_index(bbatch, obatch);
  const std::size_t batches = shape_numel(obatch);
  // Weight-style product: fold every batch into the row dimension.
  const bool folded = bbatch.empty() && amap.empty();

  Shape out_shape = obatch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  std::vector<double> out(batches * m * n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  if (folded) {
    MatMap(out.data(), batches * m, n).noalias() =
        ConstMatMap(ap, batches * m, k) * ConstMatMap(bp, k, n);
  } else {
    for (std::size_t t = 0; t < batches; ++t) {
      MatMap(out.data() + t * m * n, m, n).noalias() =
          ConstMatMap(ap + at_map(amap, t) * m * k, m, k) * ConstMatMap(bp + at_map(bmap, t) * k * n, k, n);
    }
  }
  return make_result(
      "matmul", std::move(out_shape), std::move(out), {a, b},
      [=, amap = std::move(amap), bmap = std::move(bmap)](Node& self) {
        Node& na = input(self, 0);
        Node& nb = input(self, 1);
        const double* g = self.grad.data();
        if (folded) {
          ConstMatMap gm(g, batches * m, n);
          if (na.requires_grad) {
            MatMap(na.grad_buffer().data(), batches * m, k).noalias() +=
                gm * ConstMatMap(nb.value.data(), k, n).transpose();
          }
          if (nb.requires_grad) {
            MatMap(nb.grad_buffer().data(), k, n).noalias() +=
                ConstMatMap(na.value.data(), batches * m, k).transpose() * gm;
          }
          return;
        }
        for (std::size_t t = 0; t < batches; ++t) {
          ConstMatMap gm(g + t * m * n, m, n);
          const std::size_t ia = at_map(amap, t), ib = at_map(bmap, t);
          if (na.requires_grad) {
            MatMap(na.grad_buffer().data() + ia * m * k, m, k).noalias() +=
                gm * ConstMatMap(nb.value.data() + ib * k * n, k, n).transpose();
          }
          if (nb.requires_grad) {
            MatMap(nb.grad_buffer().data() + ib * k * n, k, n).noalias() +=
                ConstMatMap(na.value.data() + ia * m * k, m, k).transpose() * gm;
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", Binary::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary("sub", Binary::kSub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", Binary::kMul, a, b); }

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor add_scalar(const Tensor& a, double offset) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v += offset;
  return make_result("add_scalar", a.shape(), std::move(out), {a}, [](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v = std::exp(v);
  return make_result("exp", a.shape(), std::move(out), {a}, [](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Tensor gelu(const Tensor& a) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * std::numbers::sqrt2 / 2.0));
  return make_result("gelu", a.shape(), std::move(out), {a}, [](Node& self) {
    Node& in = input(self, 0);
    auto g = in.grad_buffer();
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = in.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_result("sum", {}, {total}, {a}, [](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("dot: shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  return sum(mul(a, b));
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " cannot become " + shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result("reshape", shape, std::move(out), {a}, [](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& order) {
  const Shape& in_shape = a.shape();
  const std::size_t rank = in_shape.size();
  if (order.size() != rank) throw DimensionError("permute: order rank mismatch for " + shape_str(in_shape));
  std::vector<bool> seen(rank, false);
  for (std::size_t axis : order) {
    if (axis >= rank || seen[axis]) throw DimensionError("permute: invalid axis order");
    seen[axis] = true;
  }
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[order[i]];
  const Shape in_strides = strides_of(in_shape);
  // source[k] = input flat index feeding output flat index k
  const std::size_t n = a.numel();
  std::vector<std::size_t> source(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t flat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    source[k] = flat;
    for (std::size_t i = rank; i-- > 0;) {
      ++counter[i];
      flat += in_strides[order[i]];
      if (counter[i] < out_shape[i]) break;
      flat -= in_strides[order[i]] * counter[i];
      counter[i] = 0;
    }
  }
  const auto in = a.data();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = in[source[k]];
  return make_result("permute", std::move(out_shape), std::move(out), {a},
                     [source = std::move(source)](Node& self) {
                       auto g = input(self, 0).grad_buffer();
                       for (std::size_t k = 0; k < source.size(); ++k) g[source[k]] += self.grad[k];
                     });
}

Tensor transpose(const Tensor& a) {
  if (a.dim() < 2) throw DimensionError("transpose needs rank >= 2, got " + shape_str(a.shape()));
  std::vector<std::size_t> order(a.dim());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::swap(order[order.size() - 1], order[order.size() - 2]);
  return permute(a, order);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape& first = parts.front().shape();
  const std::size_t ax = resolve_axis(axis, first.size(), "concat");
  Shape out_shape = first;
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool compatible = s.size() == first.size();
    for (std::size_t i = 0; compatible && i < s.size(); ++i) compatible = i == ax || s[i] == first[i];
    if (!compatible) {
      throw DimensionError("concat: " + shape_str(s) + " incompatible with " + shape_str(first) + " along axis " +
                           std::to_string(ax));
    }
    out_shape[ax] += s[ax];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < ax; ++i) outer *= first[i];
  for (std::size_t i = ax + 1; i < first.size(); ++i) inner *= first[i];
  const std::size_t out_row = out_shape[ax] * inner;
  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t chunk = p.size(static_cast<int>(ax)) * inner;
    const auto v = p.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.begin() + o * chunk, chunk, out.begin() + o * out_row + offset);
    }
    offset += chunk;
  }
  return make_result("concat", std::move(out_shape), std::move(out), parts,
                     [outer, out_row, offsets = std::move(offsets)](Node& self) {
                       for (std::size_t i = 0; i < self.inputs.size(); ++i) {
                         Node& in = input(self, i);
                         if (!in.requires_grad) continue;
                         auto g = in.grad_buffer();
                         const std::size_t chunk = g.size() / outer;
                         for (std::size_t o = 0; o < outer; ++o) {
                           const double* src = self.grad.data() + o * out_row + offsets[i];
                           for (std::size_t c = 0; c < chunk; ++c) g[o * chunk + c] += src[c];
                         }
                       }
                     });
}

Tensor slice(const Tensor& a, int axis, std::size_t start, std::size_t length) {
  const Shape& s = a.shape();
  const std::size_t ax = resolve_axis(axis, s.size(), "slice");
  if (length == 0 || start + length > s[ax]) {
    throw DimensionError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") out of range for axis " + std::to_string(ax) + " of " + shape_str(s));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < ax; ++i) outer *= s[i];
  for (std::size_t i = ax + 1; i < s.size(); ++i) inner *= s[i];
  Shape out_shape = s;
  out_shape[ax] = length;
  const std::size_t in_row = s[ax] * inner, chunk = length * inner, first = start * inner;
  const auto v = a.data();
  std::vector<double> out(outer * chunk);
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(v.begin() + o * in_row + first, chunk, out.begin() + o * chunk);
  }
  return make_result("slice", std::move(out_shape), std::move(out), {a},
                     [outer, in_row, chunk, first](Node& self) {
                       auto g = input(self, 0).grad_buffer();
                       for (std::size_t o = 0; o < outer; ++o) {
                         for (std::size_t c = 0; c < chunk; ++c) g[o * in_row + first + c] += self.grad[o * chunk + c];
                       }
                     });
}

namespace {

// Shared softmax body; `allowed` may be empty (no mask).
Tensor softmax_impl(const char* op, const Tensor& x, std::span<const std::uint8_t> allowed, std::size_t mask_rows) {
  if (x.dim() == 0) throw DimensionError(std::string(op) + " on a scalar");
  const std::size_t cols = x.size(-1);
  const std::size_t rows = x.numel() / cols;
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * cols;
    double* yr = out.data() + r * cols;
    const std::uint8_t* mr = allowed.empty() ? nullptr : allowed.data() + (r % mask_rows) * cols;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (!mr || mr[c]) peak = std::max(peak, xr[c]);
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
      throw ContractError(std::string(op) + ": row " + std::to_string(r) + " has no allowed position");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = (!mr || mr[c]) ? std::exp(xr[c] - peak) : 0.0;
      total += yr[c];
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= total;
  }
  return make_result(op, x.shape(), std::move(out), {x}, [cols, rows](Node& self) {
    auto g = input(self, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* gy = self.grad.data() + r * cols;
      double inner = 0.0;
      for (std::size_t c = 0; c < cols; ++c) inner += gy[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += y[c] * (gy[c] - inner);
    }
  });
}

}  // namespace

Tensor softmax_lastdim(const Tensor& x) { return softmax_impl("softmax", x, {}, 1); }

Tensor masked_softmax_lastdim(const Tensor& x, std::span<const std::uint8_t> allowed, std::size_t rows,
                              std::size_t cols) {
  if (x.dim() < 2 || x.size(-1) != cols || x.size(-2) != rows || allowed.size() != rows * cols) {
    throw DimensionError("masked softmax: mask " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " does not fit logits " + shape_str(x.shape()));
  }
  return softmax_impl("masked_softmax", x, allowed, rows);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_same_last(x, gain, "layer_norm", "gain");
  require_same_last(x, bias, "layer_norm", "bias");
  const std::size_t cols = x.size(-1);
  const std::size_t rows = x.numel() / cols;
  const auto in = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<double> out(in.size());
  std::vector<double> normalized(in.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += xr[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double xh = (xr[c] - mu) * inv_std[r];
      normalized[r * cols + c] = xh;
      out[r * cols + c] = xh * gv[c] + bv[c];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {x, gain, bias},
                     [rows, cols, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
                       Node& nx = input(self, 0);
                       Node& ng = input(self, 1);
                       Node& nb = input(self, 2);
                       const double inv_cols = 1.0 / static_cast<double>(cols);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* gy = self.grad.data() + r * cols;
                         const double* xh = normalized.data() + r * cols;
                         if (ng.requires_grad) {
                           auto gg = ng.grad_buffer();
                           for (std::size_t c = 0; c < cols; ++c) gg[c] += gy[c] * xh[c];
                         }
                         if (nb.requires_grad) {
                           auto gb = nb.grad_buffer();
                           for (std::size_t c = 0; c < cols; ++c) gb[c] += gy[c];
                         }
                         if (nx.requires_grad) {
                           double mean_d = 0.0, mean_dx = 0.0;
                           for (std::size_t c = 0; c < cols; ++c) {
                             const double d = gy[c] * ng.value[c];
                             mean_d += d;
                             mean_dx += d * xh[c];
                           }
                           mean_d *= inv_cols;
                           mean_dx *= inv_cols;
                           auto gx = nx.grad_buffer();
                           for (std::size_t c = 0; c < cols; ++c) {
                             const double d = gy[c] * ng.value[c];
                             gx[r * cols + c] += inv_std[r] * (d - mean_d - xh[c] * mean_dx);
                           }
                         }
                       }
                     });
}

Tensor rms_norm(const Tensor& x, const Tensor& gain, double eps) {
  require_same_last(x, gain, "rms_norm", "gain");
  const std::size_t cols = x.size(-1);
  const std::size_t rows = x.numel() / cols;
  const auto in = x.data();
  const auto gv = gain.data();
  std::vector<double> out(in.size());
  std::vector<double> inv_rms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.data() + r * cols;
    double ms = 0.0;
    for (std::size_t c = 0; c < cols; ++c) ms += xr[c] * xr[c];
    ms /= static_cast<double>(cols);
    const double denom = std::sqrt(ms + eps);
    inv_rms[r] = denom > 0.0 ? 1.0 / denom : 0.0;
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xr[c] * inv_rms[r] * gv[c];
  }
  return make_result("rms_norm", x.shape(), std::move(out), {x, gain},
                     [rows, cols, inv_rms = std::move(inv_rms)](Node& self) {
                       Node& nx = input(self, 0);
                       Node& ng = input(self, 1);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* gy = self.grad.data() + r * cols;
                         const double* xr = nx.value.data() + r * cols;
                         if (ng.requires_grad) {
                           auto gg = ng.grad_buffer();
                           for (std::size_t c = 0; c < cols; ++c) gg[c] += gy[c] * xr[c] * inv_rms[r];
                         }
                         if (nx.requires_grad) {
                           double inner = 0.0;
                           for (std::size_t c = 0; c < cols; ++c) inner += gy[c] * ng.value[c] * xr[c] * inv_rms[r];
                           inner /= static_cast<double>(cols);
                           auto gx = nx.grad_buffer();
                           for (std::size_t c = 0; c < cols; ++c) {
                             const double xn = xr[c] * inv_rms[r];
                             gx[r * cols + c] += (gy[c] * ng.value[c] - xn * inner) * inv_rms[r];
                           }
                         }
                       }
                     });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_id) {
  if (logits.dim() == 0) throw DimensionError("cross_entropy on a scalar");
  const std::size_t classes = logits.size(-1);
  const std::size_t rows = logits.numel() / classes;
  if (targets.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_str(logits.shape()));
  }
  const auto x = logits.data();
  std::vector<double> probs(x.size(), 0.0);
  std::vector<int> kept(targets.begin(), targets.end());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int t = targets[r];
    if (t == ignore_id) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw IndexError("cross_entropy: target " + std::to_string(t) + " outside [0, " + std::to_string(classes) +
                       ")");
    }
    const double* xr = x.data() + r * classes;
    const double peak = *std::max_element(xr, xr + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(xr[c] - peak);
    for (std::size_t c = 0; c < classes; ++c) probs[r * classes + c] = std::exp(xr[c] - peak) / z;
    total += peak + std::log(z) - xr[t];
    ++count;
  }
  const double loss = count ? total / static_cast<double>(count) : 0.0;
  return make_result("cross_entropy", {}, {loss}, {logits},
                     [classes, rows, count, ignore_id, kept = std::move(kept), probs = std::move(probs)](Node& self) {
                       if (count == 0) return;
                       auto g = input(self, 0).grad_buffer();
                       const double w = self.grad[0] / static_cast<double>(count);
                       for (std::size_t r = 0; r < rows; ++r) {
                         if (kept[r] == ignore_id) continue;
                         for (std::size_t c = 0; c < classes; ++c) g[r * classes + c] += w * probs[r * classes + c];
                         g[r * classes + static_cast<std::size_t>(kept[r])] -= w;
                       }
                     });
}

Tensor embedding(const Tensor& table, std::span<const int> ids, const Shape& index_shape) {
  if (table.dim() != 2) throw DimensionError("embedding table must be 2-D, got " + shape_str(table.shape()));
  if (shape_numel(index_shape) != ids.size()) {
    throw DimensionError("embedding: " + std::to_string(ids.size()) + " ids for index shape " +
                         shape_str(index_shape));
  }
  const std::size_t vocab = table.size(0), width = table.size(1);
  const auto tv = table.data();
  std::vector<double> out(ids.size() * width);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw IndexError("embedding: id " + std::to_string(ids[i]) + " outside [0, " + std::to_string(vocab) + ")");
    }
    std::copy_n(tv.begin() + ids[i] * width, width, out.begin() + i * width);
  }
  Shape out_shape = index_shape;
  out_shape.push_back(width);
  std::vector<int> kept(ids.begin(), ids.end());
  return make_result("embedding", std::move(out_shape), std::move(out), {table},
                     [width, kept = std::move(kept)](Node& self) {
                       auto g = input(self, 0).grad_buffer();
                       for (std::size_t i = 0; i < kept.size(); ++i) {
                         for (std::size_t c = 0; c < width; ++c) g[kept[i] * width + c] += self.grad[i * width + c];
                       }
                     });
}

}  // namespace otsnet
