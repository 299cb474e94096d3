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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sada/consistency.hpp"
#include "sada/matcher.hpp"
#include "sada/model.hpp"

namespace sada::testing {

inline FeatureMap random_features(int w, int h, int c, std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  FeatureMap f(w, h, c);
  for (float& v : f.data) v = n(rng);
  return f;
}

inline double cosine_oracle(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (std::sqrt(na) < 1e-12 || std::sqrt(nb) < 1e-12) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

/// Head score in double, layer by layer from the 1×1 weights.
inline double head_oracle(std::span<const float> left, std::span<const float> right,
                          const SimilarityHead<float>& head) {
  std::vector<double> act(left.begin(), left.end());
  act.insert(act.end(), right.begin(), right.end());
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    const auto& layer = head.layers[l];
    std::vector<double> next(layer.out_channels);
    for (int o = 0; o < layer.out_channels; ++o) {
      double s = layer.bias[o];
      for (int i = 0; i < layer.in_channels; ++i) s += double(layer.w(o, i, 0, 0)) * act[i];
      next[o] = l + 1 < head.layers.size() ? std::max(0.0, s) : s;
    }
    act = std::move(next);
  }
  return act[0];
}

/// Cell-by-cell volume: (d,y,x) compares ref(x) with other(x ∓ d). The head
/// always gets the left view first.
inline std::vector<double> volume_oracle(const FeatureMap& ref, const FeatureMap& other, int dmax,
                                         const SimilarityHead<float>* head, Direction dir,
                                         std::vector<bool>& sentinel) {
  const int w = ref.width, h = ref.height;
  std::vector<double> out(static_cast<std::size_t>(dmax + 1) * w * h, 0.0);
  sentinel.assign(out.size(), false);
  for (int d = 0; d <= dmax; ++d) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = (static_cast<std::size_t>(d) * h + y) * w + x;
        const int xo = dir == Direction::left ? x - d : x + d;
        if (xo < 0 || xo >= w) {
          sentinel[i] = true;
          continue;
        }
        if (!head) {
          out[i] = cosine_oracle(ref.at(x, y), other.at(xo, y));
        } else if (dir == Direction::left) {
          out[i] = head_oracle(ref.at(x, y), other.at(xo, y), *head);
        } else {
          out[i] = head_oracle(other.at(xo, y), ref.at(x, y), *head);
        }
      }
    }
  }
  return out;
}

/// Scan-all argmax, first maximum wins.
inline DisparityMap wta_oracle(const CostVolume& v) {
  DisparityMap out(v.width, v.height);
  for (int y = 0; y < v.height; ++y) {
    for (int x = 0; x < v.width; ++x) {
      int best = -1;
      for (int d = 0; d <= v.dmax; ++d) {
        if (CostVolume::is_sentinel(v.at(d, y, x))) continue;
        if (best < 0 || v.at(d, y, x) > v.at(best, y, x)) best = d;
      }
      if (best >= 0) out.set(x, y, static_cast<float>(best));
    }
  }
  return out;
}

/// Pixelwise left-right test: keep when |D_L(x) − D_R(x − round D_L(x))| ≤ t.
inline DisparityMap lr_oracle(const DisparityMap& dl, const DisparityMap& dr, double t) {
  DisparityMap out(dl.width, dl.height);
  for (int y = 0; y < dl.height; ++y) {
    for (int x = 0; x < dl.width; ++x) {
      if (!dl.is_valid(x, y)) continue;
      const double d = dl.value(x, y);
      const long xr = x - std::lround(d);
      if (xr < 0 || xr >= dl.width || !dr.is_valid(static_cast<int>(xr), y)) continue;
      if (std::abs(d - dr.value(static_cast<int>(xr), y)) <= t) out.set(x, y, dl.value(x, y));
    }
  }
  return out;
}

}  // namespace sada::testing
