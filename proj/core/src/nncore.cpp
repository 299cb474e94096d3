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

#include "sada/nncore.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sada/error.hpp"

namespace sada {
namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

std::string shape_str(int n, int c, int h, int w) {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

// Column matrix of shape (C*k*k) x (N*Ho*Wo) for a valid correlation.
template <class T>
RowMat<T> im2col(const Tensor<T>& in, int k, int ho, int wo) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  RowMat<T> col(static_cast<Eigen::Index>(in.c) * k * k, static_cast<Eigen::Index>(in.n * plane));
  for (int ci = 0; ci < in.c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * in.n * plane;
        for (int n = 0; n < in.n; ++n) {
          const T* base = in.data.data() + in.offset(n, ci, ky, kx);
          T* dst = row + n * plane;
          for (int y = 0; y < ho; ++y) {
            const T* src = base + static_cast<std::size_t>(y) * in.w;
            for (int x = 0; x < wo; ++x) dst[y * wo + x] = src[x];
          }
        }
      }
    }
  }
  return col;
}

template <class T>
void col2im_add(const RowMat<T>& col, int k, int ho, int wo, Tensor<T>& out) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int ci = 0; ci < out.c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row =
            col.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * out.n * plane;
        for (int n = 0; n < out.n; ++n) {
          for (int y = 0; y < ho; ++y) {
            T* dst = out.data.data() + out.offset(n, ci, y + ky, kx);
            const T* src = row + n * plane + static_cast<std::size_t>(y) * wo;
            for (int x = 0; x < wo; ++x) dst[x] += src[x];
          }
        }
      }
    }
  }
}

// (N, C, H*W) <-> (C, N*H*W) reshuffles around the GEMM.
template <class T>
RowMat<T> to_channel_major(const Tensor<T>& t) {
  const std::size_t plane = static_cast<std::size_t>(t.h) * t.w;
  RowMat<T> m(t.c, static_cast<Eigen::Index>(t.n * plane));
  for (int n = 0; n < t.n; ++n) {
    for (int c = 0; c < t.c; ++c) {
      const T* src = t.data.data() + t.offset(n, c, 0, 0);
      std::copy(src, src + plane, m.data() + static_cast<std::size_t>(c) * t.n * plane + n * plane);
    }
  }
  return m;
}

template <class T>
void from_channel_major(const RowMat<T>& m, Tensor<T>& t) {
  const std::size_t plane = static_cast<std::size_t>(t.h) * t.w;
  for (int n = 0; n < t.n; ++n) {
    for (int c = 0; c < t.c; ++c) {
      const T* src = m.data() + static_cast<std::size_t>(c) * t.n * plane + n * plane;
      std::copy(src, src + plane, t.data.data() + t.offset(n, c, 0, 0));
    }
  }
}

template <class T>
int layer_pad(const ConvLayer<T>& layer) {
  return layer.padding == Padding::reflect_same ? layer.kernel / 2 : 0;
}

template <class T>
void check_layer(const ConvLayer<T>& layer) {
  if (layer.kernel < 1 || layer.kernel % 2 == 0) throw ShapeError("kernel size must be odd");
  const std::size_t k2 = static_cast<std::size_t>(layer.kernel) * layer.kernel;
  if (layer.weight.size() != static_cast<std::size_t>(layer.out_channels) * layer.in_channels * k2 ||
      layer.bias.size() != static_cast<std::size_t>(layer.out_channels)) {
    throw ShapeError("conv layer parameter buffers do not match its shape");
  }
}

}  // namespace

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <class T>
Tensor<T> reflect_pad(const Tensor<T>& input, int pad) {
  if (pad == 0) return input;
  Tensor<T> out(input.n, input.c, input.h + 2 * pad, input.w + 2 * pad);
  for (int n = 0; n < input.n; ++n) {
    for (int c = 0; c < input.c; ++c) {
      for (int y = 0; y < out.h; ++y) {
        const int sy = reflect_index(y - pad, input.h);
        for (int x = 0; x < out.w; ++x) {
          out.at(n, c, y, x) = input.at(n, c, sy, reflect_index(x - pad, input.w));
        }
      }
    }
  }
  return out;
}

template <class T>
Tensor<T> reflect_pad_backward(const Tensor<T>& grad_padded, int pad, int h, int w) {
  if (pad == 0) return grad_padded;
  Tensor<T> out(grad_padded.n, grad_padded.c, h, w);
  for (int n = 0; n < grad_padded.n; ++n) {
    for (int c = 0; c < grad_padded.c; ++c) {
      for (int y = 0; y < grad_padded.h; ++y) {
        const int sy = reflect_index(y - pad, h);
        for (int x = 0; x < grad_padded.w; ++x) {
          out.at(n, c, sy, reflect_index(x - pad, w)) += grad_padded.at(n, c, y, x);
        }
      }
    }
  }
  return out;
}

template <class T>
void glorot_uniform_init(ConvLayer<T>& layer, std::mt19937_64& rng) {
  const double k2 = static_cast<double>(layer.kernel) * layer.kernel;
  const double fan_in = layer.in_channels * k2;
  const double fan_out = layer.out_channels * k2;
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& w : layer.weight) w = static_cast<T>(dist(rng));
  std::fill(layer.bias.begin(), layer.bias.end(), T(0));
}

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer) {
  check_layer(layer);
  if (input.c != layer.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(input.c) + " channels, layer expects " +
                     std::to_string(layer.in_channels));
  }
  const int pad = layer_pad(layer);
  if (pad > 0 && (input.h < pad + 1 || input.w < pad + 1)) {
    throw ShapeError("conv2d: input " + shape_str(input.n, input.c, input.h, input.w) +
                     " too small for reflect padding");
  }
  const Tensor<T> padded = reflect_pad(input, pad);
  const int k = layer.kernel;
  const int ho = padded.h - k + 1;
  const int wo = padded.w - k + 1;
  if (ho < 1 || wo < 1) {
    throw ShapeError("conv2d: input " + shape_str(input.n, input.c, input.h, input.w) +
                     " smaller than kernel");
  }
  const RowMat<T> col = im2col(padded, k, ho, wo);
  ConstMapMat<T> weights(layer.weight.data(), layer.out_channels,
                         static_cast<Eigen::Index>(layer.in_channels) * k * k);
  RowMat<T> out_cm(layer.out_channels, col.cols());
  out_cm.noalias() = weights * col;
  for (int o = 0; o < layer.out_channels; ++o) out_cm.row(o).array() += layer.bias[o];
  Tensor<T> out(input.n, layer.out_channels, ho, wo);
  from_channel_major(out_cm, out);
  return out;
}

template <class T>
ConvGradients<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                                 const Tensor<T>& grad_out, bool want_input) {
  check_layer(layer);
  if (input.c != layer.in_channels) throw ShapeError("conv2d_backward: channel mismatch");
  const int pad = layer_pad(layer);
  const int k = layer.kernel;
  const int ho = input.h + 2 * pad - k + 1;
  const int wo = input.w + 2 * pad - k + 1;
  if (grad_out.n != input.n || grad_out.c != layer.out_channels || grad_out.h != ho ||
      grad_out.w != wo) {
    throw ShapeError("conv2d_backward: grad_out shape " +
                     shape_str(grad_out.n, grad_out.c, grad_out.h, grad_out.w) +
                     " does not match forward output " + shape_str(input.n, layer.out_channels, ho, wo));
  }
  const Tensor<T> padded = reflect_pad(input, pad);
  const RowMat<T> col = im2col(padded, k, ho, wo);
  const RowMat<T> g = to_channel_major(grad_out);

  ConvGradients<T> grads;
  grads.weight.resize(layer.weight.size());
  MapMat<T> gw(grads.weight.data(), layer.out_channels,
               static_cast<Eigen::Index>(layer.in_channels) * k * k);
  gw.noalias() = g * col.transpose();
  grads.bias.resize(layer.bias.size());
  for (int o = 0; o < layer.out_channels; ++o) grads.bias[o] = g.row(o).sum();

  if (want_input) {
    // An explicit transposed copy keeps the GEMM on Eigen's fast row-major path.
    const RowMat<T> weights_t = ConstMapMat<T>(layer.weight.data(), layer.out_channels,
                                               static_cast<Eigen::Index>(layer.in_channels) * k * k)
                                    .transpose();
    RowMat<T> gcol(weights_t.rows(), g.cols());
    gcol.noalias() = weights_t * g;
    Tensor<T> gpad(padded.n, padded.c, padded.h, padded.w);
    col2im_add(gcol, k, ho, wo, gpad);
    grads.input = reflect_pad_backward(gpad, pad, input.h, input.w);
  }
  return grads;
}

template <class T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out = input;
  relu_inplace(out);
  return out;
}

template <class T>
void relu_inplace(Tensor<T>& t) {
  for (T& v : t.data) v = v > T(0) ? v : T(0);
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad) {
  if (!input.same_shape(grad)) throw ShapeError("relu_backward: shape mismatch");
  Tensor<T> out(grad.n, grad.c, grad.h, grad.w);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    out.data[i] = input.data[i] > T(0) ? grad.data[i] : T(0);
  }
  return out;
}

template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient, and moment lengths differ");
  }
  if (std::all_of(grads.begin(), grads.end(), [](T g) { return g == T(0); })) return;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] = static_cast<T>(params[i] - state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
  }
}

GradCheckReport grad_check(const GradClosure& closure, std::span<const double> params,
                           const GradCheckOptions& opts) {
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> analytic;
  closure(p, &analytic);
  if (analytic.size() != p.size()) throw ShapeError("grad_check: closure gradient has wrong length");

  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (!opts.indices.empty()) {
    idx = opts.indices;
    for (std::size_t i : idx) {
      if (i >= p.size()) throw ArgumentError("grad_check: index out of range");
    }
  } else if (opts.subset < idx.size()) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(opts.subset);
    std::sort(idx.begin(), idx.end());
  }

  auto central = [&](std::size_t i, double h) {
    const double orig = p[i];
    p[i] = orig + h;
    const double fp = closure(p, nullptr);
    p[i] = orig - h;
    const double fm = closure(p, nullptr);
    p[i] = orig;
    return (fp - fm) / (2.0 * h);
  };
  auto relative = [&](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), opts.floor});
  };

  GradCheckReport report;
  for (std::size_t i : idx) {
    const double numeric = central(i, opts.step);
    if (opts.skip_kinks && relative(numeric, central(i, opts.step / 10.0)) > opts.tolerance) {
      ++report.kinks;
      continue;
    }
    const double abs_err = std::abs(analytic[i] - numeric);
    const double rel = relative(analytic[i], numeric);
    if (rel > report.max_rel_error || report.checked == 0) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    ++report.checked;
  }
  report.passed = report.checked > 0 && report.max_rel_error < opts.tolerance;
  return report;
}

#define SADA_INSTANTIATE(T)                                                                   \
  template void glorot_uniform_init<T>(ConvLayer<T>&, std::mt19937_64&);                      \
  template Tensor<T> reflect_pad<T>(const Tensor<T>&, int);                                   \
  template Tensor<T> reflect_pad_backward<T>(const Tensor<T>&, int, int, int);                \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const ConvLayer<T>&);                \
  template ConvGradients<T> conv2d_backward<T>(const Tensor<T>&, const ConvLayer<T>&,         \
                                               const Tensor<T>&, bool);                       \
  template Tensor<T> relu_forward<T>(const Tensor<T>&);                                       \
  template void relu_inplace<T>(Tensor<T>&);                                                  \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                    \
  template void adam_step<T>(std::span<T>, std::span<const T>, AdamState<T>&);

SADA_INSTANTIATE(float)
SADA_INSTANTIATE(double)

#undef SADA_INSTANTIATE

}  // namespace sada
