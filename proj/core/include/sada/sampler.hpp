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

#include <cstdint>
#include <random>
#include <vector>

#include "sada/imgio.hpp"
#include "sada/model.hpp"

namespace sada {

struct SamplerConfig {
  int patch_size = kPatchSize;
  int batch_size = 500;
  int neg_offset_min = 2;
  int neg_offset_max = 8;
  std::uint64_t seed = 0;
  int max_retries = 10000;

  /// Throws ArgumentError on an even patch size or a bad offset band.
  void validate() const;
};

using SamplerRng = std::mt19937_64;

/// Draws one triplet: the reference patch sits on a uniformly chosen valid
/// pseudo-GT pixel (x,y) of the left image, the positive at (x − round(d), y)
/// in the right image, and the negative at that column plus o with
/// |o| ∈ [neg_offset_min, neg_offset_max]. Draws whose patches leave an image
/// are rejected; after max_retries rejections SamplingExhaustedError is thrown.
/// `candidates` lists valid pixel indices of pseudo_gt and is built when empty.
PatchTriplet sample_triplet(const GrayImage& left, const GrayImage& right,
                            const DisparityMap& pseudo_gt, const SamplerConfig& cfg,
                            SamplerRng& rng, std::vector<std::size_t>* candidates = nullptr);

/// batch_size triplets drawn in sequence from `rng`.
std::vector<PatchTriplet> sample_batch(const GrayImage& left, const GrayImage& right,
                                       const DisparityMap& pseudo_gt, const SamplerConfig& cfg,
                                       SamplerRng& rng);

}  // namespace sada
