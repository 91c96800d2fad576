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

#include "c2c/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "c2c/errors.hpp"

namespace c2c::ag {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      shape_string(a.shape()) + " vs " +
                                      shape_string(b.shape()));
}

// Adds `delta` into a parent's gradient if it tracks one.
template <typename F>
void accumulate(Tensor::Node& parent, F&& body) {
  if (parent.requires_grad) body(parent.grad);
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<double> out(x.numel());
  const auto in = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return Tensor::from_op(x.shape(), std::move(out), {x}, [deriv](Tensor::Node& self) {
    auto& px = *self.parents[0];
    accumulate(px, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * deriv(px.value[i], self.value[i]);
    });
  });
}

thread_local bool g_grad_enabled = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  require(shape_numel(shape) == values.size(),
          "tensor: " + std::to_string(values.size()) + " values for shape " +
              shape_string(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  t.node_->grad.assign(t.numel(), 0.0);
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> values(shape_numel(shape), 0.0);
  return requires_grad ? parameter(std::move(shape), std::move(values))
                       : constant(std::move(shape), std::move(values));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return requires_grad ? parameter({}, {value}) : constant({}, {value});
}

double Tensor::item() const {
  require(numel() == 1, "item: tensor has " + std::to_string(numel()) + " elements");
  return node_->value[0];
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return constant(shape(), node_->value); }

Tensor Tensor::from_op(Shape shape, std::vector<double> values,
                       std::vector<Tensor> parents,
                       std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  const bool tracked = g_grad_enabled && std::any_of(parents.begin(), parents.end(), [](const Tensor& p) {
    return p.defined() && p.requires_grad();
  });
  if (tracked) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    node->parents.reserve(parents.size());
    // Undefined optional parents are kept as a placeholder node that does
    // not track gradients, so closures can index parents positionally.
    for (auto& p : parents) {
      node->parents.push_back(p.defined() ? p.node_ : std::make_shared<Node>());
    }
  }
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  if (numel() != 1) {
    throw ConfigError("backward: loss must be a scalar, got shape " +
                      shape_string(shape()));
  }
  if (!requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t dilation) {
  require(x.rank() == 2, "conv1d: input must be [C x T], got " + shape_string(x.shape()));
  require(weight.rank() == 3, "conv1d: weight must be [Cout x Cin x K]");
  const std::size_t c_in = x.dim(0);
  const std::size_t T = x.dim(1);
  const std::size_t c_out = weight.dim(0);
  const std::size_t K = weight.dim(2);
  require(weight.dim(1) == c_in, "conv1d: weight expects " + std::to_string(weight.dim(1)) +
                                     " input channels, input has " + std::to_string(c_in));
  require(K % 2 == 1, "conv1d: kernel size must be odd");
  require(dilation >= 1, "conv1d: dilation must be >= 1");
  if (bias.defined()) {
    require(bias.rank() == 1 && bias.dim(0) == c_out, "conv1d: bias must be [Cout]");
  }

  const auto half = static_cast<std::ptrdiff_t>(K / 2);
  const auto sT = static_cast<std::ptrdiff_t>(T);
  const auto d = static_cast<std::ptrdiff_t>(dilation);
  // Valid output range [lo, hi) for kernel tap k.
  const auto tap_range = [=](std::size_t k) {
    const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(k) - half) * d;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sT, sT - off);
    return std::tuple{off, lo, hi};
  };

  std::vector<double> out(c_out * T, 0.0);
  const double* in = x.values().data();
  const double* w = weight.values().data();
  for (std::size_t co = 0; co < c_out; ++co) {
    double* o = out.data() + co * T;
    if (bias.defined()) std::fill(o, o + T, bias[co]);
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const double* src = in + ci * T;
      for (std::size_t k = 0; k < K; ++k) {
        const double wk = w[(co * c_in + ci) * K + k];
        if (wk == 0.0) continue;
        const auto [off, lo, hi] = tap_range(k);
        for (std::ptrdiff_t t = lo; t < hi; ++t) o[t] += wk * src[t + off];
      }
    }
  }

  return Tensor::from_op(
      {c_out, T}, std::move(out), {x, weight, bias},
      [=](Tensor::Node& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        const double* g = self.grad.data();
        if (pb.requires_grad) {
          for (std::size_t co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (std::size_t t = 0; t < T; ++t) acc += g[co * T + t];
            pb.grad[co] += acc;
          }
        }
        for (std::size_t co = 0; co < c_out; ++co) {
          const double* go = g + co * T;
          for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* src = px.value.data() + ci * T;
            for (std::size_t k = 0; k < K; ++k) {
              const auto [off, lo, hi] = tap_range(k);
              const std::size_t widx = (co * c_in + ci) * K + k;
              if (pw.requires_grad) {
                double acc = 0.0;
                for (std::ptrdiff_t t = lo; t < hi; ++t) acc += go[t] * src[t + off];
                pw.grad[widx] += acc;
              }
              if (px.requires_grad) {
                const double wk = pw.value[widx];
                double* dst = px.grad.data() + ci * T;
                for (std::ptrdiff_t t = lo; t < hi; ++t) dst[t + off] += wk * go[t];
              }
            }
          }
        }
      });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require(x.rank() == 1, "linear: input must be a vector, got " + shape_string(x.shape()));
  require(weight.rank() == 2 && weight.dim(1) == x.dim(0),
          "linear: weight " + shape_string(weight.shape()) + " does not match input " +
              shape_string(x.shape()));
  const std::size_t n_out = weight.dim(0);
  const std::size_t n_in = weight.dim(1);
  if (bias.defined()) {
    require(bias.rank() == 1 && bias.dim(0) == n_out, "linear: bias must be [out]");
  }
  std::vector<double> out(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = bias.defined() ? bias[o] : 0.0;
    for (std::size_t i = 0; i < n_in; ++i) acc += weight[o * n_in + i] * x[i];
    out[o] = acc;
  }
  return Tensor::from_op({n_out}, std::move(out), {x, weight, bias},
                         [=](Tensor::Node& self) {
                           auto& px = *self.parents[0];
                           auto& pw = *self.parents[1];
                           auto& pb = *self.parents[2];
                           for (std::size_t o = 0; o < n_out; ++o) {
                             const double g = self.grad[o];
                             if (pb.requires_grad) pb.grad[o] += g;
                             for (std::size_t i = 0; i < n_in; ++i) {
                               if (pw.requires_grad) pw.grad[o * n_in + i] += g * px.value[i];
                               if (px.requires_grad) px.grad[i] += g * pw.value[o * n_in + i];
                             }
                           }
                         });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double out) { return out * (1.0 - out); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double out) { return 1.0 - out * out; });
}

Tensor square(const Tensor& x) {
  return unary(
      x, [](double v) { return v * v; }, [](double in, double) { return 2.0 * in; });
}

Tensor sqrt_floor(const Tensor& x, double floor) {
  return unary(
      x, [floor](double v) { return std::sqrt(std::max(v, floor)); },
      [floor](double in, double out) { return in > floor ? 0.5 / out : 0.0; });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Tensor::Node& self) {
    for (int p = 0; p < 2; ++p) {
      accumulate(*self.parents[p], [&](std::vector<double>& g) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      });
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Tensor::Node& self) {
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
    accumulate(*self.parents[1], [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    });
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Tensor::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    accumulate(pa, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    });
    accumulate(pb, [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    });
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return Tensor::from_op({}, {acc}, {x}, [](Tensor::Node& self) {
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      for (double& v : g) v += self.grad[0];
    });
  });
}

Tensor scale_rows(const Tensor& x, const Tensor& gate) {
  require(x.rank() == 2, "scale_rows: input must be [C x T]");
  require(gate.numel() == x.dim(0), "scale_rows: gate size must equal channel count");
  const std::size_t C = x.dim(0);
  const std::size_t T = x.dim(1);
  std::vector<double> out(C * T);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < T; ++t) out[c * T + t] = x[c * T + t] * gate[c];
  return Tensor::from_op(x.shape(), std::move(out), {x, gate}, [=](Tensor::Node& self) {
    auto& px = *self.parents[0];
    auto& pg = *self.parents[1];
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double g = self.grad[c * T + t];
        if (px.requires_grad) px.grad[c * T + t] += g * pg.value[c];
        acc += g * px.value[c * T + t];
      }
      if (pg.requires_grad) pg.grad[c] += acc;
    }
  });
}

Tensor mean_time(const Tensor& x) {
  require(x.rank() == 2, "mean_time: input must be [C x T]");
  const std::size_t C = x.dim(0);
  const std::size_t T = x.dim(1);
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) out[c] += x[c * T + t];
    out[c] /= static_cast<double>(T);
  }
  return Tensor::from_op({C}, std::move(out), {x}, [=](Tensor::Node& self) {
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t c = 0; c < C; ++c) {
        const double share = self.grad[c] / static_cast<double>(T);
        for (std::size_t t = 0; t < T; ++t) g[c * T + t] += share;
      }
    });
  });
}

Tensor softmax_rows(const Tensor& x) {
  require(x.rank() == 2, "softmax_rows: input must be [R x T]");
  const std::size_t R = x.dim(0);
  const std::size_t T = x.dim(1);
  std::vector<double> out(R * T);
  for (std::size_t r = 0; r < R; ++r) {
    const double* in = x.values().data() + r * T;
    const double peak = *std::max_element(in, in + T);
    double total = 0.0;
    for (std::size_t t = 0; t < T; ++t) total += out[r * T + t] = std::exp(in[t] - peak);
    for (std::size_t t = 0; t < T; ++t) out[r * T + t] /= total;
  }
  return Tensor::from_op(x.shape(), std::move(out), {x}, [=](Tensor::Node& self) {
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t r = 0; r < R; ++r) {
        const double* y = self.value.data() + r * T;
        const double* gy = self.grad.data() + r * T;
        double dot = 0.0;
        for (std::size_t t = 0; t < T; ++t) dot += gy[t] * y[t];
        for (std::size_t t = 0; t < T; ++t) g[r * T + t] += y[t] * (gy[t] - dot);
      }
    });
  });
}

Tensor weighted_time_sum(const Tensor& x, const Tensor& weights) {
  require(x.rank() == 2, "weighted_time_sum: input must be [C x T]");
  const std::size_t C = x.dim(0);
  const std::size_t T = x.dim(1);
  require(weights.numel() == T, "weighted_time_sum: need one weight per frame");
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < T; ++t) out[c] += weights[t] * x[c * T + t];
  return Tensor::from_op({C}, std::move(out), {x, weights}, [=](Tensor::Node& self) {
    auto& px = *self.parents[0];
    auto& pw = *self.parents[1];
    for (std::size_t c = 0; c < C; ++c) {
      const double g = self.grad[c];
      for (std::size_t t = 0; t < T; ++t) {
        if (px.requires_grad) px.grad[c * T + t] += g * pw.value[t];
        if (pw.requires_grad) pw.grad[t] += g * px.value[c * T + t];
      }
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat: no inputs");
  const Shape& first = parts.front().shape();
  require(!first.empty(), "concat: inputs must have rank >= 1");
  Shape shape = first;
  shape[0] = 0;
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    require(p.rank() == first.size() &&
                std::equal(first.begin() + 1, first.end(), p.shape().begin() + 1),
            "concat: trailing dims differ");
    shape[0] += p.dim(0);
    offsets.push_back(out.size());
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  return Tensor::from_op(shape, std::move(out), parts, [offsets](Tensor::Node& self) {
    for (std::size_t p = 0; p < offsets.size(); ++p) {
      accumulate(*self.parents[p], [&](std::vector<double>& g) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[p] + i];
      });
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  require(x.rank() >= 1 && begin + count <= x.dim(0), "slice_rows: range out of bounds");
  const std::size_t row = x.numel() / std::max<std::size_t>(1, x.dim(0));
  Shape shape = x.shape();
  shape[0] = count;
  const auto first = x.values().begin() + static_cast<std::ptrdiff_t>(begin * row);
  std::vector<double> out(first, first + static_cast<std::ptrdiff_t>(count * row));
  const std::size_t offset = begin * row;
  return Tensor::from_op(shape, std::move(out), {x}, [offset](Tensor::Node& self) {
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
    });
  });
}

Tensor convex_mix(const Tensor& a, const Tensor& b, const Tensor& alpha) {
  require_same_shape(a, b, "convex_mix");
  require(alpha.numel() == 1, "convex_mix: alpha must have one element");
  const double w = alpha.item();
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * a[i] + (1.0 - w) * b[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b, alpha}, [](Tensor::Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    auto& pw = *self.parents[2];
    const double w = pw.value[0];
    double dw = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double g = self.grad[i];
      if (pa.requires_grad) pa.grad[i] += w * g;
      if (pb.requires_grad) pb.grad[i] += (1.0 - w) * g;
      dw += g * (pa.value[i] - pb.value[i]);
    }
    if (pw.requires_grad) pw.grad[0] += dw;
  });
}

Tensor binary_cross_entropy(const Tensor& prob, int target) {
  if (target != 0 && target != 1) {
    throw ValueError("binary_cross_entropy: target must be 0 or 1, got " +
                     std::to_string(target));
  }
  require(prob.numel() == 1, "binary_cross_entropy: prediction must be a single value");
  const double raw = prob.item();
  const double p = std::clamp(raw, kBceClamp, 1.0 - kBceClamp);
  const double y = target;
  const double loss = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  const bool clamped = raw != p;
  return Tensor::from_op({}, {loss}, {prob}, [=](Tensor::Node& self) {
    if (clamped) return;
    accumulate(*self.parents[0], [&](std::vector<double>& g) {
      g[0] += self.grad[0] * (-y / p + (1.0 - y) / (1.0 - p));
    });
  });
}

}  // namespace c2c::ag
