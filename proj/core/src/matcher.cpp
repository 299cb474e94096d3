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

#include "sada/matcher.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "sada/error.hpp"
#include "sada/parallel.hpp"

namespace sada {
namespace {

using RowMatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapF = Eigen::Map<const RowMatF>;

// Unit-normalized copies of every feature vector (zero where the norm is tiny).
std::vector<float> unit_features(const FeatureMap& f) {
  std::vector<float> out(f.data.size(), 0.0f);
  const std::size_t c = static_cast<std::size_t>(f.channels);
  const std::size_t pixels = static_cast<std::size_t>(f.width) * f.height;
  for (std::size_t p = 0; p < pixels; ++p) {
    double sq = 0.0;
    for (std::size_t k = 0; k < c; ++k) sq += static_cast<double>(f.data[p * c + k]) * f.data[p * c + k];
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) continue;
    for (std::size_t k = 0; k < c; ++k) out[p * c + k] = static_cast<float>(f.data[p * c + k] / norm);
  }
  return out;
}

// First head layer split over the two halves of the concatenated input:
// returns F * W_half^T (+ bias when requested), one row per pixel.
RowMatF project_half(const FeatureMap& f, const ConvLayer<float>& first, int half, bool add_bias) {
  const int c = kFeatureChannels;
  ConstMapF feats(f.data.data(), static_cast<Eigen::Index>(f.width) * f.height, c);
  ConstMapF w(first.weight.data(), first.out_channels, 2 * c);
  RowMatF out = feats * w.middleCols(half * c, c).transpose();
  if (add_bias) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (int o = 0; o < first.out_channels; ++o) out(r, o) += first.bias[o];
    }
  }
  return out;
}

}  // namespace

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0f;
  return static_cast<float>(std::clamp(dot / (na * nb), -1.0, 1.0));
}

CostVolume build_cost_volume(const FeatureMap& ref, const FeatureMap& other, const MatchConfig& cfg,
                             const SimilarityHead<float>* head, Direction direction) {
  if (cfg.dmax < 1) throw ArgumentError("dmax must be >= 1");
  if (ref.width != other.width || ref.height != other.height || ref.channels != other.channels) {
    throw ShapeError("build_cost_volume: feature maps differ in size");
  }
  const bool trained = cfg.mode == MatchMode::trained;
  if (trained && head == nullptr) throw ArgumentError("trained matching needs a similarity head");
  if (trained && ref.channels != kFeatureChannels) {
    throw ShapeError("trained matching needs 60-channel features");
  }

  const int w = ref.width;
  const int h = ref.height;
  CostVolume vol(w, h, cfg.dmax);
  const int sign = direction == Direction::left ? -1 : 1;
  const std::size_t tasks = static_cast<std::size_t>(cfg.dmax + 1) * h;

  if (!trained) {
    const std::vector<float> ur = unit_features(ref);
    const std::vector<float> uo = unit_features(other);
    const std::size_t c = static_cast<std::size_t>(ref.channels);
    parallel_for(tasks, [&](std::size_t task) {
      const int d = static_cast<int>(task / h);
      const int y = static_cast<int>(task % h);
      for (int x = 0; x < w; ++x) {
        const int xo = x + sign * d;
        if (xo < 0 || xo >= w) continue;
        const float* a = ur.data() + (static_cast<std::size_t>(y) * w + x) * c;
        const float* b = uo.data() + (static_cast<std::size_t>(y) * w + xo) * c;
        float dot = 0.0f;
        for (std::size_t k = 0; k < c; ++k) dot += a[k] * b[k];
        vol.at(d, y, x) = std::clamp(dot, -1.0f, 1.0f);
      }
    });
    return vol;
  }

  // The head sees [left-view | right-view]; for the right direction the
  // reference map is the right view.
  const FeatureMap& left_view = direction == Direction::left ? ref : other;
  const FeatureMap& right_view = direction == Direction::left ? other : ref;
  const RowMatF proj_left = project_half(left_view, head->layers[0], 0, true);
  const RowMatF proj_right = project_half(right_view, head->layers[0], 1, false);
  const int hidden = head->layers[0].out_channels;
  ConstMapF w2(head->layers[1].weight.data(), head->layers[1].out_channels, hidden);
  Eigen::Map<const Eigen::VectorXf> b2(head->layers[1].bias.data(), head->layers[1].out_channels);
  Eigen::Map<const Eigen::RowVectorXf> w3(head->layers[2].weight.data(), head->layers[1].out_channels);
  const float b3 = head->layers[2].bias[0];

  parallel_for(tasks, [&](std::size_t task) {
    const int d = static_cast<int>(task / h);
    const int y = static_cast<int>(task % h);
    const int x_begin = direction == Direction::left ? d : 0;
    const int x_end = direction == Direction::left ? w : w - d;
    const int n = x_end - x_begin;
    if (n <= 0) return;
    // Column j is the first-layer activation for x = x_begin + j.
    Eigen::MatrixXf h1(hidden, n);
    for (int j = 0; j < n; ++j) {
      const int x = x_begin + j;
      const int xo = x + sign * d;
      const int xl = direction == Direction::left ? x : xo;
      const int xr = direction == Direction::left ? xo : x;
      const auto lrow = proj_left.row(static_cast<Eigen::Index>(y) * w + xl);
      const auto rrow = proj_right.row(static_cast<Eigen::Index>(y) * w + xr);
      h1.col(j) = (lrow + rrow).transpose().cwiseMax(0.0f);
    }
    Eigen::MatrixXf h2 = w2 * h1;
    h2.colwise() += b2;
    h2 = h2.cwiseMax(0.0f);
    const Eigen::RowVectorXf s = w3 * h2;
    for (int j = 0; j < n; ++j) vol.at(d, y, x_begin + j) = s[j] + b3;
  });
  return vol;
}

DisparityMap wta_disparity(const CostVolume& volume) {
  DisparityMap out(volume.width, volume.height);
  parallel_for(static_cast<std::size_t>(volume.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < volume.width; ++x) {
      int best_d = -1;
      float best = CostVolume::kSentinel;
      for (int d = 0; d <= volume.dmax; ++d) {
        const float s = volume.at(d, y, x);
        if (CostVolume::is_sentinel(s)) continue;
        if (best_d < 0 || s > best) {
          best = s;
          best_d = d;
        }
      }
      if (best_d >= 0) out.set(x, y, static_cast<float>(best_d));
    }
  });
  return out;
}

PairFeatures extract_pair(const GrayImage& left_normalized, const GrayImage& right_normalized,
                          const FeatureExtractor<float>& extractor) {
  PairFeatures f;
  f.left = extract_features(left_normalized, extractor, FeatureMode::same);
  f.right = extract_features(right_normalized, extractor, FeatureMode::same);
  return f;
}

FeatureMap patch_vectors(const GrayImage& normalized) {
  const int r = kPatchRadius;
  FeatureMap out(normalized.width, normalized.height, kPatchSize * kPatchSize);
  for (int y = 0; y < normalized.height; ++y) {
    for (int x = 0; x < normalized.width; ++x) {
      std::span<float> v = out.at(x, y);
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = reflect_index(y + dy, normalized.height);
        for (int dx = -r; dx <= r; ++dx) {
          v[k++] = normalized.at(reflect_index(x + dx, normalized.width), sy);
        }
      }
    }
  }
  return out;
}

StereoPrediction predict_from_features(const PairFeatures& features, const MatchConfig& cfg,
                                       const SimilarityHead<float>* head) {
  StereoPrediction p;
  p.left_volume = build_cost_volume(features.left, features.right, cfg, head, Direction::left);
  p.right_volume = build_cost_volume(features.right, features.left, cfg, head, Direction::right);
  p.left = wta_disparity(p.left_volume);
  p.right = wta_disparity(p.right_volume);
  return p;
}

StereoPrediction predict_both(const GrayImage& left, const GrayImage& right,
                              const StereoNet<float>& net, const MatchConfig& cfg) {
  if (left.width != right.width || left.height != right.height) {
    throw ShapeError("predict_both: left is " + std::to_string(left.width) + "x" +
                     std::to_string(left.height) + ", right is " + std::to_string(right.width) +
                     "x" + std::to_string(right.height));
  }
  const PairFeatures f = extract_pair(normalize_image(left), normalize_image(right), net.extractor);
  return predict_from_features(f, cfg, &net.head);
}

}  // namespace sada
