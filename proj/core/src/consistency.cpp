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

#include "sada/consistency.hpp"

#include <cmath>

#include "sada/error.hpp"

namespace sada {

ConsistencyResult lr_check(const DisparityMap& left, const DisparityMap& right,
                           const ConsistencyConfig& cfg) {
  if (left.width != right.width || left.height != right.height) {
    throw ShapeError("lr_check: left and right maps differ in size");
  }
  if (!(cfg.threshold > 0.0)) throw ArgumentError("lr_check: threshold must be > 0");
  ConsistencyResult out{DisparityMap(left.width, left.height), 0};
  for (int y = 0; y < left.height; ++y) {
    for (int x = 0; x < left.width; ++x) {
      if (!left.is_valid(x, y)) continue;
      const float d = left.value(x, y);
      const long xr = x - std::lround(d);
      if (xr < 0 || xr >= left.width) continue;
      const int xi = static_cast<int>(xr);
      if (!right.is_valid(xi, y)) continue;
      if (std::abs(static_cast<double>(d) - right.value(xi, y)) > cfg.threshold) continue;
      out.sparse.set(x, y, d);
    }
  }
  out.inconsistent_count = out.sparse.size() - out.sparse.valid_count();
  return out;
}

bool count_history_should_stop(std::span<const std::size_t> history, std::size_t patience) {
  if (patience < 1) throw ArgumentError("patience must be >= 1");
  if (history.size() < patience + 1) return false;
  for (std::size_t i = history.size() - patience; i < history.size(); ++i) {
    if (!(history[i] > history[i - 1])) return false;
  }
  return true;
}

}  // namespace sada
