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

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sada/checkpoint.hpp"
#include "sada/imgio.hpp"
#include "sada/nncore.hpp"

namespace sada {

inline constexpr int kFeatureChannels = 60;
inline constexpr int kPatchSize = 11;
/// Half-width of the extractor's receptive field (five stacked 3×3 layers).
inline constexpr int kPatchRadius = kPatchSize / 2;
inline constexpr double kDefaultMargin = 0.2;

/// Five unpadded 3×3 layers, 1→60→60→60→60→60, ReLU between layers and none
/// after the last. An 11×11 patch collapses to exactly one 60-d feature.
template <class T>
struct FeatureExtractor {
  static constexpr std::size_t kLayers = 5;
  std::array<ConvLayer<T>, kLayers> layers;

  FeatureExtractor();
};

/// Per-pixel MLP on concatenated [reference, other] features as 1×1 layers:
/// 120→60, ReLU, 60→60, ReLU, 60→1. The score is unbounded.
template <class T>
struct SimilarityHead {
  static constexpr std::size_t kLayers = 3;
  std::array<ConvLayer<T>, kLayers> layers;

  SimilarityHead();
};

/// Siamese extractor plus similarity head. Both views share one extractor.
template <class T>
struct StereoNet {
  FeatureExtractor<T> extractor;
  SimilarityHead<T> head;

  /// Glorot-uniform weights and zero biases drawn from `rng` in layer order.
  static StereoNet random(std::mt19937_64& rng);

  std::size_t parameter_count() const;
  /// Packs weights then biases per layer, extractor first, then head.
  std::vector<T> parameters() const;
  void set_parameters(std::span<const T> packed);

  std::vector<ConvLayer<T>> all_layers() const;
};

template <class U, class T>
StereoNet<U> net_cast(const StereoNet<T>& src) {
  StereoNet<U> dst;
  for (std::size_t i = 0; i < src.extractor.layers.size(); ++i)
    dst.extractor.layers[i] = layer_cast<U>(src.extractor.layers[i]);
  for (std::size_t i = 0; i < src.head.layers.size(); ++i)
    dst.head.layers[i] = layer_cast<U>(src.head.layers[i]);
  return dst;
}

Checkpoint to_checkpoint(const StereoNet<float>& net, const AdamState<float>* adam = nullptr);
/// Throws FormatError when the layer table does not match the architecture.
StereoNet<float> net_from_checkpoint(const Checkpoint& ckpt);

/// Per-image zero mean, unit standard deviation. A constant image becomes all
/// zeros.
GrayImage normalize_image(const GrayImage& image);

/// H×W×C raster, channels contiguous per pixel.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

  std::span<const float> at(int x, int y) const {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
  std::span<float> at(int x, int y) {
    return {data.data() + (static_cast<std::size_t>(y) * width + x) * channels,
            static_cast<std::size_t>(channels)};
  }
};

enum class FeatureMode { valid, same };

/// Runs the extractor on a batch; activations are kept in `trace` when non-null.
template <class T>
Tensor<T> extractor_forward(const FeatureExtractor<T>& net, const Tensor<T>& input,
                            std::vector<Tensor<T>>* trace = nullptr);

/// same: H×W×60 with 5-pixel reflect padding. valid: (H−10)×(W−10)×60.
FeatureMap extract_features(const GrayImage& image, const FeatureExtractor<float>& net,
                            FeatureMode mode);

template <class T>
T score_pair(std::span<const T> f_ref, std::span<const T> f_other, const SimilarityHead<T>& head);

/// Scores n pairs; rows of kFeatureChannels values each.
template <class T>
std::vector<T> score_pairs(std::span<const T> f_ref, std::span<const T> f_other, std::size_t n,
                           const SimilarityHead<T>& head);

/// max(0, margin + s_minus − s_plus).
template <class T>
T hinge_loss(T s_plus, T s_minus, T margin = T(kDefaultMargin)) {
  const T v = margin + s_minus - s_plus;
  return v > T(0) ? v : T(0);
}

/// Reference, matching, and non-matching crops, row-major size×size.
struct PatchTriplet {
  int size = kPatchSize;
  std::vector<float> reference;
  std::vector<float> positive;
  std::vector<float> negative;
  // Patch centers in image coordinates; informational.
  int ref_x = 0;
  int y = 0;
  int pos_x = 0;
  int neg_x = 0;
};

template <class T>
struct TripletLossResult {
  double loss = 0.0;
  std::vector<T> gradient;  ///< packed like StereoNet::parameters()
  std::size_t active = 0;   ///< triplets with a positive hinge
};

/// Mean hinge loss over the batch and its gradient w.r.t. every weight. The
/// three branches share the extractor, so extractor gradients accumulate from
/// all of them. Per-chunk sums are reduced in a fixed order.
template <class T>
TripletLossResult<T> triplet_loss(std::span<const PatchTriplet> batch, const StereoNet<T>& net,
                                  T margin = T(kDefaultMargin));

}  // namespace sada
