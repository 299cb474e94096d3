// Copyright 2026 The SAda Authors.
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

// Dense-tensor numeric core: convolution, ReLU, Adam, and a finite-difference
// gradient checker. Scalar type is float for training and inference, double
// for gradient checks; both are instantiated in nncore.cpp.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace sada {

/// NCHW tensor. A single image is n == 1.
template <class T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t offset(int in, int ic, int y, int x) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x;
  }
  T& at(int in, int ic, int y, int x) { return data[offset(in, ic, y, x)]; }
  T at(int in, int ic, int y, int x) const { return data[offset(in, ic, y, x)]; }
  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

enum class Padding : std::uint32_t { valid = 0, reflect_same = 1 };

/// k×k convolution layer (cross-correlation, no kernel flip).
/// Weights are laid out [out][in][ky][kx].
template <class T>
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  Padding padding = Padding::valid;
  std::vector<T> weight;
  std::vector<T> bias;

  ConvLayer() = default;
  ConvLayer(int in, int out, int k = 3, Padding pad = Padding::valid)
      : in_channels(in),
        out_channels(out),
        kernel(k),
        padding(pad),
        weight(static_cast<std::size_t>(out) * in * k * k, T(0)),
        bias(static_cast<std::size_t>(out), T(0)) {}

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
  T& w(int o, int i, int ky, int kx) {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
  T w(int o, int i, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
};

/// Converts a layer to another scalar type.
template <class U, class T>
ConvLayer<U> layer_cast(const ConvLayer<T>& src) {
  ConvLayer<U> dst(src.in_channels, src.out_channels, src.kernel, src.padding);
  for (std::size_t i = 0; i < src.weight.size(); ++i) dst.weight[i] = static_cast<U>(src.weight[i]);
  for (std::size_t i = 0; i < src.bias.size(); ++i) dst.bias[i] = static_cast<U>(src.bias[i]);
  return dst;
}

/// Uniform Glorot init in ±sqrt(6 / (fan_in + fan_out)), zero bias.
template <class T>
void glorot_uniform_init(ConvLayer<T>& layer, std::mt19937_64& rng);

/// Mirror index without repeating the edge sample (…2 1 | 0 1 2 … n-1 | n-2 …).
int reflect_index(int i, int n);

/// Pads each spatial border by `pad` using reflect_index.
template <class T>
Tensor<T> reflect_pad(const Tensor<T>& input, int pad);

/// Adjoint of reflect_pad: folds a padded gradient back onto the source grid.
template <class T>
Tensor<T> reflect_pad_backward(const Tensor<T>& grad_padded, int pad, int h, int w);

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer);

template <class T>
struct ConvGradients {
  Tensor<T> input;  ///< empty when the caller did not ask for it
  std::vector<T> weight;
  std::vector<T> bias;
};

/// Gradients of conv2d_forward. Pass want_input = false for the first layer of a
/// network, whose input gradient is never consumed.
template <class T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& grad_out, bool want_input = true);

template <class T>
Tensor<T> relu_forward(const Tensor<T>& input);

template <class T>
void relu_inplace(Tensor<T>& t);

/// Passes grad where input > 0; the gradient at exactly 0 is 0.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad);

template <class T>
struct AdamState {
  std::uint64_t step = 0;
  std::vector<T> m;
  std::vector<T> v;
  double lr = 6.0e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate) : m(n, T(0)), v(n, T(0)), lr(learning_rate) {}
};

/// One bias-corrected Adam update in place. A gradient vector that is zero
/// everywhere leaves parameters and state untouched.
template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state);

/// Loss closure for grad_check: returns f(params) and, when grad is non-null,
/// writes the analytic gradient (resized by the closure if needed).
using GradClosure = std::function<double(std::span<const double> params, std::vector<double>* grad)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t kinks = 0;  ///< coordinates excluded as straddling a non-differentiable point
  bool passed = false;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-4;
  std::size_t subset = 64;  ///< coordinates checked; all when >= params.size()
  std::vector<std::size_t> indices;  ///< explicit coordinates; overrides subset
  std::uint64_t seed = 1;
  /// Relative errors use max(|analytic|, |numeric|, floor) as denominator so
  /// vanishing gradients are compared in absolute terms.
  double floor = 1e-7;
  /// When set, a coordinate whose estimates at step and step / 10 disagree by
  /// more than the tolerance is counted in `kinks` instead of compared.
  bool skip_kinks = false;
};

/// Compares analytic and central-difference gradients on a random subset of
/// coordinates.
GradCheckReport grad_check(const GradClosure& closure, std::span<const double> params,
                           const GradCheckOptions& opts = {});

}  // namespace sada
