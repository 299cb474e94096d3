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
#include <span>

#include "sada/imgio.hpp"

namespace sada {

struct ConsistencyConfig {
  double threshold = 1.1;
};

struct ConsistencyResult {
  DisparityMap sparse;  ///< valid only at consistent pixels
  std::size_t inconsistent_count = 0;
};

/// Keeps (x,y) iff D_L is valid there, x − round(D_L) is inside the image,
/// D_R is valid at that column, and |D_L(x,y) − D_R(x − round(D_L), y)| ≤ threshold.
ConsistencyResult lr_check(const DisparityMap& left, const DisparityMap& right,
                           const ConsistencyConfig& cfg = {});

/// True iff each of the last `patience` entries is a strict increase over its
/// predecessor. Needs at least patience + 1 entries.
bool count_history_should_stop(std::span<const std::size_t> history, std::size_t patience);

}  // namespace sada
