// Copyright 2026 The C2C Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal reverse-mode automatic differentiation over dense double buffers.
//
// A Tensor is a shared handle to a graph node. Operations record their
// parents and a backward closure whenever any input requires a gradient;
// otherwise they produce plain constants. Calling backward() on a scalar
// result accumulates into the grad buffer of every reachable leaf that
// requires a gradient. Intermediate gradients are reset on every call, leaf
// gradients are not, so repeated calls accumulate.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace c2c::ag {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;
  };

  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return !node_->backward; }

  std::span<const double> values() const { return node_->value; }
  // Direct write access; intended for leaves (initialization, optimizers).
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }

  // Empty span when no gradient has been allocated.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void zero_grad();

  void backward() const;

  // Value copy with no history.
  Tensor detach() const;

  // Internal: wraps an op result. Parents and the closure are dropped when
  // no parent requires a gradient.
  static Tensor from_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents,
                        std::function<void(Node&)> backward);

  Node& node() const { return *node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

// Disables graph recording on this thread while alive; ops return plain
// constants. Used for evaluation passes.
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

// Shapes: activations are [channels x time]; vectors are [n]; scalars [].

// out[c,t] = b[c] + sum_{i,k} w[c,i,k] * x[i, t + (k - K/2) * dilation],
// zero outside [0, T). `bias` may be undefined.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t dilation);

// y = W x + b for a vector x; `bias` may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor square(const Tensor& x);
// sqrt(max(x, floor)); zero gradient where the floor is active.
Tensor sqrt_floor(const Tensor& x, double floor);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor sum(const Tensor& x);

// x[c,t] * gate[c].
Tensor scale_rows(const Tensor& x, const Tensor& gate);
// Mean over the last axis of a [C x T] tensor.
Tensor mean_time(const Tensor& x);
// Softmax over the last axis of a [R x T] tensor, row by row.
Tensor softmax_rows(const Tensor& x);
// sum_t weights[t] * x[c,t]; weights holds T values (any shape).
Tensor weighted_time_sum(const Tensor& x, const Tensor& weights);

// Concatenation / slicing along axis 0. Trailing dims must agree.
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);

// alpha * a + (1 - alpha) * b with alpha a one-element tensor.
Tensor convex_mix(const Tensor& a, const Tensor& b, const Tensor& alpha);

// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-7, 1 - 1e-7].
Tensor binary_cross_entropy(const Tensor& prob, int target);

inline constexpr double kBceClamp = 1e-7;

}  // namespace c2c::ag

namespace c2c {
using ag::Tensor;
}
