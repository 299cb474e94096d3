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

#include "sada/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sada/error.hpp"
#include "sada/parallel.hpp"

namespace sada {

template <class T>
FeatureExtractor<T>::FeatureExtractor()
    : layers{ConvLayer<T>(1, kFeatureChannels), ConvLayer<T>(kFeatureChannels, kFeatureChannels),
             ConvLayer<T>(kFeatureChannels, kFeatureChannels),
             ConvLayer<T>(kFeatureChannels, kFeatureChannels),
             ConvLayer<T>(kFeatureChannels, kFeatureChannels)} {}

template <class T>
SimilarityHead<T>::SimilarityHead()
    : layers{ConvLayer<T>(2 * kFeatureChannels, kFeatureChannels, 1),
             ConvLayer<T>(kFeatureChannels, kFeatureChannels, 1),
             ConvLayer<T>(kFeatureChannels, 1, 1)} {}

template <class T>
StereoNet<T> StereoNet<T>::random(std::mt19937_64& rng) {
  StereoNet net;
  for (auto& layer : net.extractor.layers) glorot_uniform_init(layer, rng);
  for (auto& layer : net.head.layers) glorot_uniform_init(layer, rng);
  return net;
}

template <class T>
std::size_t StereoNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : extractor.layers) n += layer.parameter_count();
  for (const auto& layer : head.layers) n += layer.parameter_count();
  return n;
}

template <class T>
std::vector<T> StereoNet<T>::parameters() const {
  std::vector<T> out;
  out.reserve(parameter_count());
  auto append = [&out](const ConvLayer<T>& layer) {
    out.insert(out.end(), layer.weight.begin(), layer.weight.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  };
  for (const auto& layer : extractor.layers) append(layer);
  for (const auto& layer : head.layers) append(layer);
  return out;
}

template <class T>
void StereoNet<T>::set_parameters(std::span<const T> packed) {
  if (packed.size() != parameter_count()) throw ShapeError("set_parameters: length mismatch");
  std::size_t pos = 0;
  auto take = [&](ConvLayer<T>& layer) {
    std::copy_n(packed.begin() + pos, layer.weight.size(), layer.weight.begin());
    pos += layer.weight.size();
    std::copy_n(packed.begin() + pos, layer.bias.size(), layer.bias.begin());
    pos += layer.bias.size();
  };
  for (auto& layer : extractor.layers) take(layer);
  for (auto& layer : head.layers) take(layer);
}

template <class T>
std::vector<ConvLayer<T>> StereoNet<T>::all_layers() const {
  std::vector<ConvLayer<T>> out(extractor.layers.begin(), extractor.layers.end());
  out.insert(out.end(), head.layers.begin(), head.layers.end());
  return out;
}

Checkpoint to_checkpoint(const StereoNet<float>& net, const AdamState<float>* adam) {
  Checkpoint ckpt;
  ckpt.layers = net.all_layers();
  if (adam) ckpt.adam = *adam;
  return ckpt;
}

StereoNet<float> net_from_checkpoint(const Checkpoint& ckpt) {
  StereoNet<float> net;
  const std::vector<ConvLayer<float>> expected = net.all_layers();
  if (ckpt.layers.size() != expected.size()) {
    throw FormatError("checkpoint has " + std::to_string(ckpt.layers.size()) +
                      " layers, network needs " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& a = ckpt.layers[i];
    const auto& b = expected[i];
    if (a.in_channels != b.in_channels || a.out_channels != b.out_channels ||
        a.kernel != b.kernel || a.padding != b.padding) {
      throw FormatError("checkpoint layer " + std::to_string(i) + " does not match the network");
    }
  }
  for (std::size_t i = 0; i < net.extractor.layers.size(); ++i) net.extractor.layers[i] = ckpt.layers[i];
  for (std::size_t i = 0; i < net.head.layers.size(); ++i)
    net.head.layers[i] = ckpt.layers[net.extractor.layers.size() + i];
  return net;
}

GrayImage normalize_image(const GrayImage& image) {
  GrayImage out = image;
  if (image.data.empty()) return out;
  double mean = 0.0;
  for (float v : image.data) mean += v;
  mean /= static_cast<double>(image.data.size());
  double var = 0.0;
  for (float v : image.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(image.data.size());
  const double sd = std::sqrt(var);
  const double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
  for (float& v : out.data) v = static_cast<float>((v - mean) * inv);
  return out;
}

template <class T>
Tensor<T> extractor_forward(const FeatureExtractor<T>& net, const Tensor<T>& input,
                            std::vector<Tensor<T>>* trace) {
  if (trace) trace->clear();
  Tensor<T> act = input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Tensor<T> z = conv2d_forward(act, net.layers[l]);
    if (l + 1 < net.layers.size()) relu_inplace(z);
    if (trace) trace->push_back(std::move(act));
    act = std::move(z);
  }
  return act;
}

FeatureMap extract_features(const GrayImage& image, const FeatureExtractor<float>& net,
                            FeatureMode mode) {
  const int r = kPatchRadius;
  Tensor<float> src(1, 1, image.height, image.width);
  std::copy(image.data.begin(), image.data.end(), src.data.begin());
  if (mode == FeatureMode::same) {
    if (image.width < r + 1 || image.height < r + 1) {
      throw ShapeError("extract_features: image too small for same-mode padding");
    }
    src = reflect_pad(src, r);
  } else if (image.width < kPatchSize || image.height < kPatchSize) {
    throw ShapeError("extract_features: image smaller than 11x11 in valid mode");
  }
  const int out_w = src.w - 2 * r;
  const int out_h = src.h - 2 * r;
  FeatureMap out(out_w, out_h, kFeatureChannels);

  // Horizontal stripes keep the im2col buffers bounded on large images.
  constexpr int kStripe = 32;
  const int stripes = (out_h + kStripe - 1) / kStripe;
  parallel_for(static_cast<std::size_t>(stripes), [&](std::size_t s) {
    const int y0 = static_cast<int>(s) * kStripe;
    const int rows = std::min(kStripe, out_h - y0);
    Tensor<float> piece(1, 1, rows + 2 * r, src.w);
    std::copy_n(src.data.begin() + static_cast<std::size_t>(y0) * src.w, piece.size(),
                piece.data.begin());
    const Tensor<float> f = extractor_forward(net, piece);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < out_w; ++x) {
        std::span<float> dst = out.at(x, y0 + y);
        for (int c = 0; c < kFeatureChannels; ++c) dst[c] = f.at(0, c, y, x);
      }
    }
  });
  return out;
}

namespace {

template <class T>
Tensor<T> head_forward(const SimilarityHead<T>& head, const Tensor<T>& input,
                       std::vector<Tensor<T>>* trace = nullptr) {
  if (trace) trace->clear();
  Tensor<T> act = input;
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    Tensor<T> z = conv2d_forward(act, head.layers[l]);
    if (l + 1 < head.layers.size()) relu_inplace(z);
    if (trace) trace->push_back(std::move(act));
    act = std::move(z);
  }
  return act;
}

// Backpropagates through a ReLU-separated stack whose layer inputs are in
// `trace`; accumulates packed gradients starting at `offset`. Returns the
// input gradient unless the first layer's input gradient is not needed.
template <class T, std::size_t N>
Tensor<T> stack_backward(const std::array<ConvLayer<T>, N>& layers,
                         const std::vector<Tensor<T>>& trace, Tensor<T> grad, std::vector<T>& packed,
                         std::size_t offset, bool want_input) {
  std::vector<std::size_t> offsets(N);
  for (std::size_t l = 0; l < N; ++l) {
    offsets[l] = offset;
    offset += layers[l].parameter_count();
  }
  for (std::size_t l = N; l-- > 0;) {
    const bool need_input = l > 0 || want_input;
    ConvGradients<T> g = conv2d_backward(trace[l], layers[l], grad, need_input);
    T* dst = packed.data() + offsets[l];
    for (std::size_t i = 0; i < g.weight.size(); ++i) dst[i] += g.weight[i];
    dst += g.weight.size();
    for (std::size_t i = 0; i < g.bias.size(); ++i) dst[i] += g.bias[i];
    if (!need_input) return {};
    grad = l > 0 ? relu_backward(trace[l], g.input) : std::move(g.input);
  }
  return grad;
}

template <class T>
Tensor<T> gather_items(const Tensor<T>& src, const std::vector<std::size_t>& rows) {
  Tensor<T> out(static_cast<int>(rows.size()), src.c, src.h, src.w);
  const std::size_t item = static_cast<std::size_t>(src.c) * src.h * src.w;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::copy_n(src.data.begin() + rows[j] * item, item, out.data.begin() + j * item);
  }
  return out;
}

template <class T>
Tensor<T> pair_tensor(std::span<const T> f_ref, std::span<const T> f_other, std::size_t n) {
  const int c = kFeatureChannels;
  if (f_ref.size() != n * c || f_other.size() != n * c) {
    throw ShapeError("score_pairs: feature buffers must hold n rows of 60 values");
  }
  Tensor<T> in(static_cast<int>(n), 2 * c, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(f_ref.begin() + i * c, c, in.data.begin() + i * 2 * c);
    std::copy_n(f_other.begin() + i * c, c, in.data.begin() + i * 2 * c + c);
  }
  return in;
}

}  // namespace

template <class T>
T score_pair(std::span<const T> f_ref, std::span<const T> f_other, const SimilarityHead<T>& head) {
  return score_pairs(f_ref, f_other, 1, head)[0];
}

template <class T>
std::vector<T> score_pairs(std::span<const T> f_ref, std::span<const T> f_other, std::size_t n,
                           const SimilarityHead<T>& head) {
  if (n == 0) return {};
  const Tensor<T> out = head_forward(head, pair_tensor(f_ref, f_other, n));
  return out.data;
}

template <class T>
TripletLossResult<T> triplet_loss(std::span<const PatchTriplet> batch, const StereoNet<T>& net,
                                  T margin) {
  if (batch.empty()) throw ArgumentError("triplet_loss: empty batch");
  for (const PatchTriplet& t : batch) {
    const std::size_t area = static_cast<std::size_t>(kPatchSize) * kPatchSize;
    if (t.size != kPatchSize || t.reference.size() != area || t.positive.size() != area ||
        t.negative.size() != area) {
      throw ShapeError("triplet_loss: patches must be 11x11");
    }
  }
  const int c = kFeatureChannels;
  const std::size_t total = batch.size();
  const T inv_total = T(1) / static_cast<T>(total);
  const std::size_t nparams = net.parameter_count();
  std::size_t head_offset = 0;
  for (const auto& layer : net.extractor.layers) head_offset += layer.parameter_count();

  constexpr std::size_t kChunk = 50;
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  struct Partial {
    std::vector<T> grad;
    double loss = 0.0;
    std::size_t active = 0;
  };
  std::vector<Partial> partial(chunks);

  parallel_for(chunks, [&](std::size_t ci) {
    const std::size_t first = ci * kChunk;
    const std::size_t m = std::min(kChunk, total - first);
    const int mi = static_cast<int>(m);
    Partial& out = partial[ci];
    out.grad.assign(nparams, T(0));

    // Layout: [reference × m, positive × m, negative × m].
    Tensor<T> patches(3 * mi, 1, kPatchSize, kPatchSize);
    const std::size_t area = static_cast<std::size_t>(kPatchSize) * kPatchSize;
    for (std::size_t i = 0; i < m; ++i) {
      const PatchTriplet& t = batch[first + i];
      std::transform(t.reference.begin(), t.reference.end(), patches.data.begin() + i * area,
                     [](float v) { return static_cast<T>(v); });
      std::transform(t.positive.begin(), t.positive.end(),
                     patches.data.begin() + (m + i) * area, [](float v) { return static_cast<T>(v); });
      std::transform(t.negative.begin(), t.negative.end(),
                     patches.data.begin() + (2 * m + i) * area,
                     [](float v) { return static_cast<T>(v); });
    }
    std::vector<Tensor<T>> ext_trace;
    const Tensor<T> feats = extractor_forward(net.extractor, patches, &ext_trace);

    // Head input: [ref_i | pos_i] for i < m, then [ref_i | neg_i].
    Tensor<T> pairs(2 * mi, 2 * c, 1, 1);
    for (std::size_t i = 0; i < m; ++i) {
      const T* fr = feats.data.data() + i * c;
      const T* fp = feats.data.data() + (m + i) * c;
      const T* fn = feats.data.data() + (2 * m + i) * c;
      std::copy_n(fr, c, pairs.data.begin() + i * 2 * c);
      std::copy_n(fp, c, pairs.data.begin() + i * 2 * c + c);
      std::copy_n(fr, c, pairs.data.begin() + (m + i) * 2 * c);
      std::copy_n(fn, c, pairs.data.begin() + (m + i) * 2 * c + c);
    }
    std::vector<Tensor<T>> head_trace;
    const Tensor<T> scores = head_forward(net.head, pairs, &head_trace);

    // Only triplets with a positive hinge contribute; backpropagate through a
    // compacted copy of their activations.
    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < m; ++i) {
      const T l = hinge_loss(scores.data[i], scores.data[m + i], margin);
      out.loss += static_cast<double>(l);
      if (l > T(0)) act.push_back(i);
    }
    out.active = act.size();
    if (act.empty()) return;
    const std::size_t k = act.size();
    const int ki = static_cast<int>(k);

    std::vector<std::size_t> pair_rows(2 * k);
    std::vector<std::size_t> patch_rows(3 * k);
    for (std::size_t j = 0; j < k; ++j) {
      pair_rows[j] = act[j];
      pair_rows[k + j] = m + act[j];
      patch_rows[j] = act[j];
      patch_rows[k + j] = m + act[j];
      patch_rows[2 * k + j] = 2 * m + act[j];
    }
    for (auto& t : head_trace) t = gather_items(t, pair_rows);
    for (auto& t : ext_trace) t = gather_items(t, patch_rows);

    Tensor<T> grad_scores(2 * ki, 1, 1, 1);
    for (std::size_t j = 0; j < k; ++j) {
      grad_scores.data[j] = -inv_total;
      grad_scores.data[k + j] = inv_total;
    }
    const Tensor<T> grad_pairs =
        stack_backward(net.head.layers, head_trace, grad_scores, out.grad, head_offset, true);
    Tensor<T> grad_feats(3 * ki, c, 1, 1);
    for (std::size_t j = 0; j < k; ++j) {
      const T* gp = grad_pairs.data.data() + j * 2 * c;
      const T* gn = grad_pairs.data.data() + (k + j) * 2 * c;
      T* ref = grad_feats.data.data() + j * c;
      T* pos = grad_feats.data.data() + (k + j) * c;
      T* neg = grad_feats.data.data() + (2 * k + j) * c;
      for (int q = 0; q < c; ++q) {
        ref[q] = gp[q] + gn[q];
        pos[q] = gp[c + q];
        neg[q] = gn[c + q];
      }
    }
    stack_backward(net.extractor.layers, ext_trace, std::move(grad_feats), out.grad, 0, false);
  });

  TripletLossResult<T> result;
  result.gradient.assign(nparams, T(0));
  double loss_sum = 0.0;
  for (const Partial& p : partial) {
    loss_sum += p.loss;
    result.active += p.active;
    if (p.active == 0) continue;
    for (std::size_t i = 0; i < nparams; ++i) result.gradient[i] += p.grad[i];
  }
  result.loss = loss_sum / static_cast<double>(total);
  return result;
}

#define SADA_INSTANTIATE(T)                                                                      \
  template struct FeatureExtractor<T>;                                                           \
  template struct SimilarityHead<T>;                                                             \
  template struct StereoNet<T>;                                                                  \
  template Tensor<T> extractor_forward<T>(const FeatureExtractor<T>&, const Tensor<T>&,          \
                                          std::vector<Tensor<T>>*);                              \
  template T score_pair<T>(std::span<const T>, std::span<const T>, const SimilarityHead<T>&);    \
  template std::vector<T> score_pairs<T>(std::span<const T>, std::span<const T>, std::size_t,    \
                                         const SimilarityHead<T>&);                              \
  template TripletLossResult<T> triplet_loss<T>(std::span<const PatchTriplet>,                   \
                                                const StereoNet<T>&, T);

SADA_INSTANTIATE(float)
SADA_INSTANTIATE(double)

#undef SADA_INSTANTIATE

}  // namespace sada
