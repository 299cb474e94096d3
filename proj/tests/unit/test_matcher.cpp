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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "match_oracles.hpp"
#include "sada/error.hpp"
#include "sada/matcher.hpp"
#include "sada/parallel.hpp"
#include "synthetic.hpp"

using namespace sada;
using namespace sada::testing;

namespace {

double max_volume_error(const CostVolume& v, const std::vector<double>& oracle,
                        const std::vector<bool>& sentinel) {
  double worst = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    if (sentinel[i]) {
      if (!CostVolume::is_sentinel(v.scores[i])) return INFINITY;
      continue;
    }
    if (!std::isfinite(v.scores[i])) return INFINITY;
    worst = std::max(worst, std::abs(v.scores[i] - oracle[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("matcher") {

TEST_CASE("cosine similarity cases") {
  std::vector<float> a(60, 0.0f), b(60, 0.0f);
  a[0] = 1.0f;
  b[0] = 1.0f;
  b[1] = 1.0f;
  CHECK(cosine_similarity(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cosine_similarity(b, b) == doctest::Approx(1.0));
  std::vector<float> c(60, 0.0f);
  c[1] = 2.0f;
  CHECK(cosine_similarity(a, c) == 0.0f);
  CHECK(cosine_similarity(a, std::vector<float>(60, 0.0f)) == 0.0f);
  CHECK_THROWS_AS(cosine_similarity(a, std::vector<float>(3)), ShapeError);
}

TEST_CASE("identical features give a unit d=0 slice") {
  std::mt19937_64 rng(1);
  const FeatureMap f = random_features(9, 5, 4, rng);
  const CostVolume v = build_cost_volume(f, f, {4, MatchMode::cosine}, nullptr, Direction::left);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 9; ++x) CHECK(v.at(0, y, x) == doctest::Approx(1.0f).epsilon(1e-6));
}

TEST_CASE("sentinel cells follow the search direction") {
  std::mt19937_64 rng(2);
  const FeatureMap a = random_features(6, 2, 3, rng), b = random_features(6, 2, 3, rng);
  const CostVolume l = build_cost_volume(a, b, {4, MatchMode::cosine}, nullptr, Direction::left);
  const CostVolume r = build_cost_volume(a, b, {4, MatchMode::cosine}, nullptr, Direction::right);
  for (int d = 0; d <= 4; ++d) {
    for (int x = 0; x < 6; ++x) {
      CHECK(CostVolume::is_sentinel(l.at(d, 1, x)) == (x - d < 0));
      CHECK(CostVolume::is_sentinel(r.at(d, 1, x)) == (x + d >= 6));
    }
  }
}

TEST_CASE("a feature shift of three columns is recovered") {
  std::mt19937_64 rng(3);
  const FeatureMap ref = random_features(20, 4, 8, rng);
  FeatureMap other(20, 4, 8);
  // other(x) = ref(x + 3), so ref(x) matches other(x − 3).
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x + 3 < 20; ++x) std::copy_n(ref.at(x + 3, y).begin(), 8, other.at(x, y).begin());
  const CostVolume v = build_cost_volume(ref, other, {6, MatchMode::cosine}, nullptr, Direction::left);
  const DisparityMap d = wta_disparity(v);
  for (int y = 0; y < 4; ++y)
    for (int x = 6; x < 20; ++x) CHECK(d.value(x, y) == 3.0f);
}

TEST_CASE("cosine volumes match the brute-force oracle") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> sz(2, 16), dm(1, 8);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = sz(rng), h = sz(rng), dmax = dm(rng);
    const FeatureMap a = random_features(w, h, trial % 3 == 0 ? 4 : 60, rng);
    const FeatureMap b = random_features(w, h, a.channels, rng);
    for (Direction dir : {Direction::left, Direction::right}) {
      std::vector<bool> sentinel;
      const auto oracle = volume_oracle(a, b, dmax, nullptr, dir, sentinel);
      const CostVolume v = build_cost_volume(a, b, {dmax, MatchMode::cosine}, nullptr, dir);
      CHECK(max_volume_error(v, oracle, sentinel) <= 1e-6);
      for (float s : v.scores) {
        if (!CostVolume::is_sentinel(s)) CHECK((s >= -1.0f && s <= 1.0f));
      }
    }
  }
}

TEST_CASE("trained volumes match per-cell head evaluation") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> sz(2, 16), dm(1, 8);
  for (int trial = 0; trial < 12; ++trial) {
    const auto net = StereoNet<float>::random(rng);
    const int w = sz(rng), h = sz(rng), dmax = dm(rng);
    const FeatureMap a = random_features(w, h, 60, rng);
    const FeatureMap b = random_features(w, h, 60, rng);
    for (Direction dir : {Direction::left, Direction::right}) {
      std::vector<bool> sentinel;
      const auto oracle = volume_oracle(a, b, dmax, &net.head, dir, sentinel);
      const CostVolume v = build_cost_volume(a, b, {dmax, MatchMode::trained}, &net.head, dir);
      CHECK(max_volume_error(v, oracle, sentinel) <= 1e-6);
    }
  }
}

TEST_CASE("volume arguments are validated") {
  std::mt19937_64 rng(6);
  const FeatureMap a = random_features(5, 5, 60, rng), b = random_features(4, 5, 60, rng);
  CHECK_THROWS_AS(build_cost_volume(a, b, {3, MatchMode::cosine}, nullptr, Direction::left), ShapeError);
  CHECK_THROWS_AS(build_cost_volume(a, a, {0, MatchMode::cosine}, nullptr, Direction::left), ArgumentError);
  CHECK_THROWS_AS(build_cost_volume(a, a, {3, MatchMode::trained}, nullptr, Direction::left), ArgumentError);
}

TEST_CASE("WTA picks d=0 when that slice dominates") {
  CostVolume v(4, 3, 5);
  for (int d = 0; d <= 5; ++d)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 4; ++x) v.at(d, y, x) = d == 0 ? 1.0f : 0.5f;
  const DisparityMap m = wta_disparity(v);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.valid[i]);
    CHECK(m.values[i] == 0.0f);
  }
}

TEST_CASE("WTA breaks ties toward the smallest disparity") {
  CostVolume v(1, 1, 7);
  for (int d = 0; d <= 7; ++d) v.at(d, 0, 0) = 0.1f;
  v.at(2, 0, 0) = 0.9f;
  v.at(5, 0, 0) = 0.9f;
  CHECK(wta_disparity(v).value(0, 0) == 2.0f);
}

TEST_CASE("WTA leaves all-sentinel pixels invalid") {
  CostVolume v(2, 1, 3);
  v.at(1, 0, 1) = 0.2f;
  const DisparityMap m = wta_disparity(v);
  CHECK_FALSE(m.is_valid(0, 0));
  CHECK(m.value(1, 0) == 1.0f);
}

TEST_CASE("WTA matches the scan-all oracle and is a true argmax") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> sz(1, 16), dm(1, 8), level(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    CostVolume v(sz(rng), sz(rng), dm(rng));
    for (int d = 0; d <= v.dmax; ++d)
      for (int y = 0; y < v.height; ++y)
        for (int x = 0; x < v.width; ++x)
          if (x - d >= 0) v.at(d, y, x) = static_cast<float>(level(rng)) * 0.25f;
    const DisparityMap got = wta_disparity(v);
    const DisparityMap expect = wta_oracle(v);
    CHECK(got.valid == expect.valid);
    CHECK(got.values == expect.values);
    for (int y = 0; y < v.height; ++y) {
      for (int x = 0; x < v.width; ++x) {
        const int best = static_cast<int>(got.value(x, y));
        for (int d = 0; d <= v.dmax; ++d)
          if (!CostVolume::is_sentinel(v.at(d, y, x))) CHECK(v.at(best, y, x) >= v.at(d, y, x));
      }
    }
  }
}

TEST_CASE("identical images predict zero disparity in cosine mode") {
  std::mt19937_64 rng(8);
  const auto net = StereoNet<float>::random(rng);
  const GrayImage img = smooth_noise(24, 18, 5);
  const auto pred = predict_both(img, img, net, {8, MatchMode::cosine});
  for (std::size_t i = 0; i < pred.left.size(); ++i) {
    CHECK(pred.left.valid[i]);
    CHECK(pred.left.values[i] == 0.0f);
    CHECK(pred.right.values[i] == 0.0f);
  }
}

TEST_CASE("a shifted texture is recovered at interior pixels") {
  std::mt19937_64 rng(9);
  const auto net = StereoNet<float>::random(rng);
  const int k = 4;
  const SyntheticPair p = shifted_pair(48, 30, k, 11);
  const auto pred = predict_both(p.left, p.right, net, {8, MatchMode::cosine});
  for (int y = 11; y < 30 - 11; ++y)
    for (int x = 11 + k; x < 48 - 11; ++x) CHECK(pred.left.value(x, y) == static_cast<float>(k));
}

TEST_CASE("prediction is deterministic and rejects size mismatch") {
  std::mt19937_64 rng(10);
  const auto net = StereoNet<float>::random(rng);
  const SyntheticPair p = shifted_pair(20, 16, 2, 3);
  const auto a = predict_both(p.left, p.right, net, {6, MatchMode::trained});
  set_worker_count(2);
  const auto b = predict_both(p.left, p.right, net, {6, MatchMode::trained});
  set_worker_count(0);
  CHECK(a.left.values == b.left.values);
  CHECK(a.right.values == b.right.values);
  CHECK(a.left_volume.scores == b.left_volume.scores);
  CHECK_THROWS_AS(predict_both(p.left, GrayImage(19, 16), net, {6, MatchMode::trained}), ShapeError);
}

TEST_CASE("raw patch vectors hold the reflected neighborhood") {
  GrayImage img(3, 2);
  for (int i = 0; i < 6; ++i) img.data[i] = static_cast<float>(i);
  const FeatureMap f = patch_vectors(img);
  CHECK(f.channels == 121);
  // Center tap of pixel (2,1) is the pixel itself; its left neighbor is (1,1).
  CHECK(f.at(2, 1)[60] == 5.0f);
  CHECK(f.at(2, 1)[59] == 4.0f);
  CHECK(f.at(2, 1)[61] == 4.0f);
}

}  // TEST_SUITE
