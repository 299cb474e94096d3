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

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sada/imgio.hpp"
#include "sada/model.hpp"

namespace sada {

enum class MatchMode { cosine, trained };
enum class Direction { left, right };

struct MatchConfig {
  int dmax = 64;
  MatchMode mode = MatchMode::trained;
};

/// Similarity scores laid out [d][y][x]. A cell whose matching column falls
/// outside the other image holds kSentinel.
struct CostVolume {
  static constexpr float kSentinel = -std::numeric_limits<float>::infinity();

  int width = 0;
  int height = 0;
  int dmax = 0;
  std::vector<float> scores;

  CostVolume() = default;
  CostVolume(int w, int h, int max_disparity)
      : width(w),
        height(h),
        dmax(max_disparity),
        scores(static_cast<std::size_t>(max_disparity + 1) * w * h, kSentinel) {}

  std::size_t index(int d, int y, int x) const {
    return (static_cast<std::size_t>(d) * height + y) * width + x;
  }
  float at(int d, int y, int x) const { return scores[index(d, y, x)]; }
  float& at(int d, int y, int x) { return scores[index(d, y, x)]; }
  static bool is_sentinel(float v) { return v == kSentinel; }
};

/// dot(a,b) / (|a||b|); 0 when either norm is below 1e-12.
float cosine_similarity(std::span<const float> a, std::span<const float> b);

/// left:  cell (d,y,x) = sim(ref(x,y), other(x−d,y))
/// right: cell (d,y,x) = sim(ref(x,y), other(x+d,y))
/// In trained mode the head always receives [left-view, right-view] features,
/// the order it is trained on, so for Direction::right `ref` is fed second.
CostVolume build_cost_volume(const FeatureMap& ref, const FeatureMap& other, const MatchConfig& cfg,
                             const SimilarityHead<float>* head, Direction direction);

/// Argmax over non-sentinel cells, ties to the smallest d. Pixels with no
/// finite cell are invalid.
DisparityMap wta_disparity(const CostVolume& volume);

struct StereoPrediction {
  DisparityMap left;
  DisparityMap right;
  CostVolume left_volume;
  CostVolume right_volume;
};

/// Features for both views of a normalized pair.
struct PairFeatures {
  FeatureMap left;
  FeatureMap right;
};

PairFeatures extract_pair(const GrayImage& left_normalized, const GrayImage& right_normalized,
                          const FeatureExtractor<float>& extractor);

/// Raw-intensity 11×11 patch vectors (reflect padded) used as features.
FeatureMap patch_vectors(const GrayImage& normalized);

StereoPrediction predict_from_features(const PairFeatures& features, const MatchConfig& cfg,
                                       const SimilarityHead<float>* head);

/// Normalizes both images, extracts features once, and returns the left- and
/// right-reference WTA maps together with their volumes.
StereoPrediction predict_both(const GrayImage& left, const GrayImage& right,
                              const StereoNet<float>& net, const MatchConfig& cfg);

}  // namespace sada
