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

#include "sada/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "sada/error.hpp"

namespace sada {

double subpixel_offset(double c_prev, double c_peak, double c_next, int d,
                       const SubpixelConfig& cfg) {
  const double ld = c_prev - c_peak;
  const double rd = c_next - c_peak;
  const double base = static_cast<double>(d);
  double refined = base;
  if (ld <= rd) {
    if (std::abs(rd) < 1e-12) return base;
    refined = base - 0.5 + std::atan(ld / rd);
  } else {
    if (std::abs(ld) < 1e-12) return base;
    refined = cfg.variant == SubpixelVariant::as_printed ? base - 0.5 + std::atan(rd / ld)
                                                         : base + 0.5 - std::atan(rd / ld);
  }
  if (cfg.clamp_to_half) refined = std::clamp(refined, base - 0.5, base + 0.5);
  return refined;
}

DisparityMap subpixel_refine(const CostVolume& volume, const DisparityMap& disp,
                             const SubpixelConfig& cfg) {
  if (volume.width != disp.width || volume.height != disp.height) {
    throw ShapeError("subpixel_refine: volume and disparity map differ in size");
  }
  DisparityMap out = disp;
  for (int y = 0; y < disp.height; ++y) {
    for (int x = 0; x < disp.width; ++x) {
      if (!disp.is_valid(x, y)) continue;
      const long d = std::lround(disp.value(x, y));
      if (d < 1 || d > volume.dmax - 1) continue;
      const int di = static_cast<int>(d);
      const float c_prev = volume.at(di - 1, y, x);
      const float c_peak = volume.at(di, y, x);
      const float c_next = volume.at(di + 1, y, x);
      if (CostVolume::is_sentinel(c_prev) || CostVolume::is_sentinel(c_next) ||
          CostVolume::is_sentinel(c_peak)) {
        continue;
      }
      out.values[out.index(x, y)] = static_cast<float>(subpixel_offset(c_prev, c_peak, c_next, di, cfg));
    }
  }
  return out;
}

double point_error(const DisparityMap& pred, const DisparityMap& gt, const MetricsConfig& cfg) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeError("point_error: prediction and ground truth differ in size");
  }
  if (!(cfg.tau >= 0.0)) throw ArgumentError("tau must be >= 0");
  std::size_t joint = 0, bad = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!pred.valid[i] || !gt.valid[i]) continue;
    ++joint;
    if (std::abs(static_cast<double>(gt.values[i]) - pred.values[i]) >= cfg.tau) ++bad;
  }
  if (joint == 0) throw UndefinedMetricError("point_error: no pixel is valid in both maps");
  return 100.0 * static_cast<double>(bad) / static_cast<double>(joint);
}

double completion(const DisparityMap& pred, const DisparityMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw ShapeError("completion: prediction and ground truth differ in size");
  }
  std::size_t covered = 0, total = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid[i]) continue;
    ++total;
    if (pred.valid[i]) ++covered;
  }
  if (total == 0) throw UndefinedMetricError("completion: ground truth has no valid pixel");
  return 100.0 * static_cast<double>(covered) / static_cast<double>(total);
}

namespace {

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const DisparityMap& pred, const DisparityMap& gt,
                       std::span<const double> taus, bool header) {
  // Compute everything first so a failure emits no partial table.
  std::vector<double> errors;
  errors.reserve(taus.size());
  for (double tau : taus) errors.push_back(point_error(pred, gt, MetricsConfig{tau}));
  const double comp = completion(pred, gt);
  if (header) out << "metric,tau,value\n";
  char buf[64];
  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.3f", errors[i]);
    out << "point_error," << fmt_number(taus[i]) << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.3f", comp);
  out << "completion,," << buf << '\n';
}

}  // namespace sada
