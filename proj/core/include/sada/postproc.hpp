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

#include <ostream>
#include <span>

#include "sada/imgio.hpp"
#include "sada/matcher.hpp"

namespace sada {

enum class SubpixelVariant {
  /// d − 0.5 + atan(ld/rd) if ld ≤ rd, else d − 0.5 + atan(rd/ld).
  as_printed,
  /// Same first branch; the second branch mirrors it: d + 0.5 − atan(rd/ld).
  symmetric,
};

struct SubpixelConfig {
  SubpixelVariant variant = SubpixelVariant::as_printed;
  bool clamp_to_half = true;
};

/// Arctangent interpolation from the similarity triple around the WTA peak,
/// ld = c[d−1] − c[d], rd = c[d+1] − c[d].
double subpixel_offset(double c_prev, double c_peak, double c_next, int d,
                       const SubpixelConfig& cfg);

/// Refines valid pixels with 1 ≤ d ≤ dmax−1 whose neighbor cells are finite.
/// Other pixels, and the validity mask, are left unchanged.
DisparityMap subpixel_refine(const CostVolume& volume, const DisparityMap& disp,
                             const SubpixelConfig& cfg = {});

struct MetricsConfig {
  double tau = 4.0;
};

/// Percentage of jointly valid pixels with |gt − pred| ≥ tau.
/// Throws UndefinedMetricError when no pixel is valid in both maps.
double point_error(const DisparityMap& pred, const DisparityMap& gt, const MetricsConfig& cfg);

/// Percentage of gt-valid pixels for which pred is valid.
double completion(const DisparityMap& pred, const DisparityMap& gt);

/// Writes "metric,tau,value" rows: one point_error row per tau, then one
/// completion row with an empty tau column. Writes the header when asked.
void write_metrics_csv(std::ostream& out, const DisparityMap& pred, const DisparityMap& gt,
                       std::span<const double> taus, bool header = true);

}  // namespace sada
