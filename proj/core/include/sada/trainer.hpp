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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sada/consistency.hpp"
#include "sada/error.hpp"
#include "sada/imgio.hpp"
#include "sada/matcher.hpp"
#include "sada/model.hpp"
#include "sada/nncore.hpp"
#include "sada/sampler.hpp"

namespace sada {

enum class Epoch0Mode {
  feature_cosine,  ///< cosine over features of the randomly initialized extractor
  raw_cosine,      ///< cosine over normalized 11×11 intensity patches
};

struct TrainConfig {
  double lr = 6.0e-5;
  double margin = 0.2;
  int batch_size = 500;
  int batches_per_epoch = 32;
  int max_epochs = 300;
  int patience = 50;
  int dmax = 64;
  std::uint64_t seed = 0;
  Epoch0Mode epoch0_mode = Epoch0Mode::feature_cosine;
  int checkpoint_every = 10;
  int neg_offset_min = 2;
  int neg_offset_max = 8;
  double lr_threshold = 1.1;

  void validate() const;
  SamplerConfig sampler() const;
  MatchConfig match(MatchMode mode) const { return {dmax, mode}; }
  ConsistencyConfig consistency() const { return {lr_threshold}; }
};

struct StereoPair {
  GrayImage left;
  GrayImage right;
};
using StereoPairSet = std::vector<StereoPair>;

/// Raised when an epoch cannot assemble a batch for some pair.
class TrainingAbortedError : public Error {
 public:
  TrainingAbortedError(const std::string& what, std::size_t pair, std::size_t valid_pixels)
      : Error(what), pair_index(pair), valid_count(valid_pixels) {}
  std::size_t pair_index;
  std::size_t valid_count;
};

struct TrainState {
  StereoNet<float> net;
  AdamState<float> adam;
  int epoch = 0;  ///< completed training epochs
  std::size_t initial_inconsistent = 0;
  std::vector<std::size_t> inconsistency_history;  ///< one entry per completed epoch
  std::vector<double> loss_history;
  SamplerRng rng;
  std::vector<ConsistencyResult> pseudo_gt;  ///< current labels, one per pair
  std::vector<DisparityMap> right_pseudo_gt; ///< right-reference counterpart
  /// Dense left-view WTA maps per epoch and pair, filled when recording is on.
  std::vector<std::vector<DisparityMap>> prediction_history;
  bool record_predictions = false;

  /// Fresh network and optimizer from cfg.seed; normalizes the pairs once.
  static TrainState create(const StereoPairSet& pairs, const TrainConfig& cfg);

  std::vector<std::pair<GrayImage, GrayImage>> normalized;
};

struct EpochReport {
  int epoch = 0;
  double mean_loss = 0.0;
  std::size_t inconsistent = 0;
  std::size_t active_triplets = 0;
};

/// Epoch-0 labels: cosine matching (per cfg.epoch0_mode) followed by the
/// left-right check. Stores them in `state` and returns them.
std::vector<ConsistencyResult> initialize_pseudo_gt(const StereoPairSet& pairs, TrainState& state,
                                                    const TrainConfig& cfg);

/// batches_per_epoch optimizer steps per pair, then regenerates every pair's
/// labels with the trained head and appends the total inconsistent count.
EpochReport train_epoch(const StereoPairSet& pairs, TrainState& state, const TrainConfig& cfg);

struct FitHooks {
  /// Where checkpoints, convergence.csv, and final labels go; empty for none.
  std::filesystem::path out_dir;
  std::function<void(const EpochReport&, const TrainState&)> on_epoch;
  /// Test hook replacing the measured inconsistent count of an epoch.
  std::function<std::size_t(int epoch, std::size_t measured)> inconsistency_override;
  bool record_predictions = false;
  std::ostream* log = nullptr;
};

/// Runs the self-supervised loop until max_epochs or until the inconsistent
/// count (epoch 0 included) has risen for `patience` consecutive epochs.
TrainState fit(const StereoPairSet& pairs, const TrainConfig& cfg, const FitHooks& hooks = {});

/// Pearson correlation; NaN when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Correlation between the per-epoch inconsistent count and the per-epoch
/// tau-point error of the recorded dense predictions (pooled over pairs).
double track_correlation(const TrainState& state, std::span<const DisparityMap> gt, double tau);

/// Per-epoch pooled tau-point error of the recorded predictions.
std::vector<double> point_error_history(const TrainState& state, std::span<const DisparityMap> gt,
                                        double tau);

/// Mirror of lr_check for the right view: keeps (x,y) of D_R when D_L at
/// x + round(D_R) agrees within the threshold.
ConsistencyResult lr_check_right(const DisparityMap& left, const DisparityMap& right,
                                 const ConsistencyConfig& cfg);

std::string checkpoint_name(int epoch);

}  // namespace sada
