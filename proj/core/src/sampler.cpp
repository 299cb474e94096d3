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

#include "sada/sampler.hpp"

#include <cmath>
#include <string>

#include "sada/error.hpp"

namespace sada {
namespace {

std::vector<float> crop(const GrayImage& img, int cx, int cy, int size) {
  const int r = size / 2;
  std::vector<float> out(static_cast<std::size_t>(size) * size);
  for (int dy = 0; dy < size; ++dy) {
    const float* src = img.data.data() + static_cast<std::size_t>(cy - r + dy) * img.width + (cx - r);
    std::copy(src, src + size, out.begin() + static_cast<std::size_t>(dy) * size);
  }
  return out;
}

bool inside(const GrayImage& img, int cx, int cy, int r) {
  return cx - r >= 0 && cy - r >= 0 && cx + r < img.width && cy + r < img.height;
}

}  // namespace

void SamplerConfig::validate() const {
  if (patch_size < 1 || patch_size % 2 == 0) throw ArgumentError("patch_size must be odd");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (neg_offset_min < 1 || neg_offset_max < neg_offset_min) {
    throw ArgumentError("need 1 <= neg_offset_min <= neg_offset_max");
  }
  if (max_retries < 1) throw ArgumentError("max_retries must be >= 1");
}

PatchTriplet sample_triplet(const GrayImage& left, const GrayImage& right,
                            const DisparityMap& pseudo_gt, const SamplerConfig& cfg,
                            SamplerRng& rng, std::vector<std::size_t>* candidates) {
  cfg.validate();
  if (left.width != right.width || left.height != right.height || pseudo_gt.width != left.width ||
      pseudo_gt.height != left.height) {
    throw ShapeError("sample_triplet: images and pseudo ground truth differ in size");
  }
  std::vector<std::size_t> local;
  std::vector<std::size_t>& pool = candidates ? *candidates : local;
  if (pool.empty()) {
    for (std::size_t i = 0; i < pseudo_gt.size(); ++i) {
      if (pseudo_gt.valid[i]) pool.push_back(i);
    }
  }
  if (pool.empty()) {
    throw SamplingExhaustedError("pseudo ground truth has no valid pixel");
  }

  const int r = cfg.patch_size / 2;
  const int band = cfg.neg_offset_max - cfg.neg_offset_min + 1;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> offset(0, 2 * band - 1);
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    const std::size_t idx = pool[pick(rng)];
    const int o_code = offset(rng);
    const int magnitude = cfg.neg_offset_min + (o_code % band);
    const int o = o_code < band ? -magnitude : magnitude;
    const int x = static_cast<int>(idx % pseudo_gt.width);
    const int y = static_cast<int>(idx / pseudo_gt.width);
    const long d = std::lround(pseudo_gt.values[idx]);
    const long pos_x = x - d;
    const long neg_x = pos_x + o;
    if (!inside(left, x, y, r) || !inside(right, static_cast<int>(pos_x), y, r) ||
        !inside(right, static_cast<int>(neg_x), y, r)) {
      continue;
    }
    PatchTriplet t;
    t.size = cfg.patch_size;
    t.reference = crop(left, x, y, cfg.patch_size);
    t.positive = crop(right, static_cast<int>(pos_x), y, cfg.patch_size);
    t.negative = crop(right, static_cast<int>(neg_x), y, cfg.patch_size);
    t.ref_x = x;
    t.y = y;
    t.pos_x = static_cast<int>(pos_x);
    t.neg_x = static_cast<int>(neg_x);
    return t;
  }
  throw SamplingExhaustedError("no in-bounds triplet after " + std::to_string(cfg.max_retries) +
                               " draws (" + std::to_string(pool.size()) + " valid pixels)");
}

std::vector<PatchTriplet> sample_batch(const GrayImage& left, const GrayImage& right,
                                       const DisparityMap& pseudo_gt, const SamplerConfig& cfg,
                                       SamplerRng& rng) {
  cfg.validate();
  std::vector<std::size_t> candidates;
  std::vector<PatchTriplet> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));
  for (int i = 0; i < cfg.batch_size; ++i) {
    batch.push_back(sample_triplet(left, right, pseudo_gt, cfg, rng, &candidates));
  }
  return batch;
}

}  // namespace sada
