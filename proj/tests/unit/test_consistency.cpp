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

#include <random>
#include <vector>

#include "match_oracles.hpp"
#include "sada/consistency.hpp"
#include "sada/error.hpp"

using namespace sada;

namespace {

DisparityMap row_map(const std::vector<float>& values) {
  DisparityMap m(static_cast<int>(values.size()), 1);
  for (int x = 0; x < m.width; ++x) m.set(x, 0, values[x]);
  return m;
}

DisparityMap random_disparities(int w, int h, int dmax, std::mt19937_64& rng, bool fractional) {
  std::uniform_int_distribution<int> d(0, dmax);
  std::uniform_real_distribution<float> frac(-0.6f, 0.6f);
  std::bernoulli_distribution keep(0.85);
  DisparityMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (keep(rng)) m.set(x, y, std::max(0.0f, d(rng) + (fractional ? frac(rng) : 0.0f)));
  return m;
}

}  // namespace

TEST_SUITE("consistency") {

TEST_CASE("matching disparities are consistent") {
  DisparityMap dl(8, 1), dr(8, 1);
  dl.set(6, 0, 5.0f);
  dr.set(1, 0, 5.0f);
  const auto r = lr_check(dl, dr);
  CHECK(r.sparse.is_valid(6, 0));
  CHECK(r.sparse.value(6, 0) == 5.0f);
  CHECK(r.inconsistent_count == 7);
}

TEST_CASE("a difference of 1.5 is inconsistent") {
  DisparityMap dl(8, 1), dr(8, 1);
  dl.set(6, 0, 5.0f);
  dr.set(1, 0, 3.5f);
  CHECK_FALSE(lr_check(dl, dr).sparse.is_valid(6, 0));
}

TEST_CASE("an out-of-image lookup is inconsistent") {
  DisparityMap dl(8, 1), dr(8, 1);
  dl.set(3, 0, 5.0f);
  for (int x = 0; x < 8; ++x) dr.set(x, 0, 5.0f);
  CHECK_FALSE(lr_check(dl, dr).sparse.is_valid(3, 0));
}

TEST_CASE("a difference equal to the threshold is kept") {
  const auto dl = row_map({0.0f, 0.0f, 2.0f});
  const auto dr = row_map({3.0f, 0.0f, 0.0f});
  CHECK(lr_check(dl, dr, {1.0}).sparse.is_valid(2, 0));
  CHECK_FALSE(lr_check(dl, dr, {0.99}).sparse.is_valid(2, 0));
  const auto dl2 = row_map({0.0f, 0.0f, 0.0f, 2.5f});
  const auto dr2 = row_map({3.6f, 0.0f, 0.0f, 0.0f});
  CHECK(lr_check(dl2, dr2).sparse.is_valid(3, 0));
}

TEST_CASE("fractional disparities index the rounded column") {
  DisparityMap dl(8, 1), dr(8, 1);
  dl.set(6, 0, 2.6f);
  dr.set(3, 0, 3.0f);
  dr.set(4, 0, 9.0f);
  CHECK(lr_check(dl, dr).sparse.is_valid(6, 0));
}

TEST_CASE("arguments are validated") {
  CHECK_THROWS_AS(lr_check(DisparityMap(3, 1), DisparityMap(2, 1)), ShapeError);
  CHECK_THROWS_AS(lr_check(DisparityMap(3, 1), DisparityMap(3, 1), {0.0}), ArgumentError);
}

TEST_CASE("lr_check matches the pixelwise oracle exactly") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 16), h = 1 + static_cast<int>(rng() % 16);
    const bool frac = trial % 2 == 1;
    const auto dl = random_disparities(w, h, 8, rng, frac);
    const auto dr = random_disparities(w, h, 8, rng, frac);
    const auto got = lr_check(dl, dr);
    const auto expect = sada::testing::lr_oracle(dl, dr, 1.1);
    REQUIRE(got.sparse.valid == expect.valid);
    for (std::size_t i = 0; i < expect.size(); ++i)
      if (expect.valid[i]) CHECK(got.sparse.values[i] == expect.values[i]);
    // Counts partition the image and the mask only shrinks.
    CHECK(got.inconsistent_count + got.sparse.valid_count() == static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < dl.size(); ++i)
      if (got.sparse.valid[i]) CHECK(dl.valid[i]);
  }
}

TEST_CASE("raising the threshold never loses consistent pixels") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dl = random_disparities(12, 9, 6, rng, true);
    const auto dr = random_disparities(12, 9, 6, rng, true);
    std::size_t prev = 0;
    for (double t : {0.1, 0.5, 1.1, 2.0, 4.0}) {
      const std::size_t kept = lr_check(dl, dr, {t}).sparse.valid_count();
      CHECK(kept >= prev);
      prev = kept;
    }
  }
}

TEST_CASE("stop rule fires after a full strict run") {
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i <= 50; ++i) h.push_back(100 + i);
  CHECK(count_history_should_stop(h, 50));
  h.insert(h.begin(), 1000);
  CHECK(count_history_should_stop(h, 50));
}

TEST_CASE("a tie anywhere in the window blocks the stop") {
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i <= 50; ++i) h.push_back(100 + i);
  for (std::size_t k = 1; k < h.size(); ++k) {
    auto t = h;
    t[k] = t[k - 1];
    for (std::size_t j = k + 1; j < t.size(); ++j) t[j] = t[j - 1] + 1;
    CHECK_FALSE(count_history_should_stop(t, 50));
  }
}

TEST_CASE("short histories never stop") {
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i < 50; ++i) h.push_back(i);
  CHECK_FALSE(count_history_should_stop(h, 50));
  CHECK_FALSE(count_history_should_stop({}, 3));
  CHECK(count_history_should_stop(std::vector<std::size_t>{1, 2}, 1));
  CHECK_THROWS_AS(count_history_should_stop(h, 0), ArgumentError);
}

}  // TEST_SUITE
