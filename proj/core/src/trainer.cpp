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

#include "sada/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sada/checkpoint.hpp"
#include "sada/postproc.hpp"

namespace sada {
namespace {

constexpr std::uint64_t kSamplerStream = 0x9E3779B97F4A7C15ULL;

void check_pairs(const StereoPairSet& pairs) {
  if (pairs.empty()) throw ArgumentError("training needs at least one stereo pair");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.left.width != p.right.width || p.left.height != p.right.height) {
      throw ShapeError("pair " + std::to_string(i) + ": left and right differ in size");
    }
    if (p.left.width < kPatchSize || p.left.height < kPatchSize) {
      throw ShapeError("pair " + std::to_string(i) + ": image smaller than 11x11");
    }
  }
}

DisparityMap mirror(const DisparityMap& m) {
  DisparityMap out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const int sx = m.width - 1 - x;
      out.values[out.index(x, y)] = m.value(sx, y);
      out.valid[out.index(x, y)] = m.valid[m.index(sx, y)];
    }
  }
  return out;
}

void store_labels(TrainState& state, std::size_t i, const StereoPrediction& pred,
                  const TrainConfig& cfg) {
  state.pseudo_gt[i] = lr_check(pred.left, pred.right, cfg.consistency());
  state.right_pseudo_gt[i] = lr_check_right(pred.left, pred.right, cfg.consistency()).sparse;
}

std::size_t total_inconsistent(const TrainState& state) {
  std::size_t total = 0;
  for (const auto& r : state.pseudo_gt) total += r.inconsistent_count;
  return total;
}

std::string format_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("lr must be finite and >= 0");
  if (!(margin > 0.0)) throw ArgumentError("margin must be > 0");
  if (batch_size < 1 || batches_per_epoch < 1 || max_epochs < 1 || patience < 1 ||
      checkpoint_every < 1) {
    throw ArgumentError("batch_size, batches_per_epoch, max_epochs, patience, checkpoint_every must be >= 1");
  }
  if (dmax < 1) throw ArgumentError("dmax must be >= 1");
  if (!(lr_threshold > 0.0)) throw ArgumentError("lr_threshold must be > 0");
  sampler().validate();
}

SamplerConfig TrainConfig::sampler() const {
  SamplerConfig s;
  s.patch_size = kPatchSize;
  s.batch_size = batch_size;
  s.neg_offset_min = neg_offset_min;
  s.neg_offset_max = neg_offset_max;
  s.seed = seed;
  return s;
}

TrainState TrainState::create(const StereoPairSet& pairs, const TrainConfig& cfg) {
  cfg.validate();
  check_pairs(pairs);
  TrainState state;
  std::mt19937_64 init_rng(cfg.seed);
  state.net = StereoNet<float>::random(init_rng);
  state.adam = AdamState<float>(state.net.parameter_count(), cfg.lr);
  state.rng.seed(cfg.seed ^ kSamplerStream);
  state.normalized.reserve(pairs.size());
  for (const auto& p : pairs) {
    state.normalized.emplace_back(normalize_image(p.left), normalize_image(p.right));
  }
  state.pseudo_gt.resize(pairs.size());
  state.right_pseudo_gt.resize(pairs.size());
  return state;
}

ConsistencyResult lr_check_right(const DisparityMap& left, const DisparityMap& right,
                                 const ConsistencyConfig& cfg) {
  ConsistencyResult r = lr_check(mirror(right), mirror(left), cfg);
  r.sparse = mirror(r.sparse);
  return r;
}

std::vector<ConsistencyResult> initialize_pseudo_gt(const StereoPairSet& pairs, TrainState& state,
                                                    const TrainConfig& cfg) {
  check_pairs(pairs);
  if (state.normalized.size() != pairs.size()) throw ArgumentError("state was built for other pairs");
  const MatchConfig mc = cfg.match(MatchMode::cosine);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [left, right] = state.normalized[i];
    PairFeatures f;
    if (cfg.epoch0_mode == Epoch0Mode::raw_cosine) {
      f.left = patch_vectors(left);
      f.right = patch_vectors(right);
    } else {
      f = extract_pair(left, right, state.net.extractor);
    }
    store_labels(state, i, predict_from_features(f, mc, nullptr), cfg);
  }
  state.initial_inconsistent = total_inconsistent(state);
  return state.pseudo_gt;
}

EpochReport train_epoch(const StereoPairSet& pairs, TrainState& state, const TrainConfig& cfg) {
  check_pairs(pairs);
  if (state.pseudo_gt.size() != pairs.size()) throw ArgumentError("pseudo ground truth missing");
  state.adam.lr = cfg.lr;
  const SamplerConfig sc = cfg.sampler();
  const float margin = static_cast<float>(cfg.margin);

  EpochReport report;
  report.epoch = state.epoch + 1;
  double loss_sum = 0.0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [left, right] = state.normalized[i];
    const DisparityMap& labels = state.pseudo_gt[i].sparse;
    for (int b = 0; b < cfg.batches_per_epoch; ++b) {
      std::vector<PatchTriplet> batch;
      try {
        batch = sample_batch(left, right, labels, sc, state.rng);
      } catch (const SamplingExhaustedError& e) {
        throw TrainingAbortedError("epoch " + std::to_string(report.epoch) + ", pair " +
                                       std::to_string(i) + " (" +
                                       std::to_string(labels.valid_count()) +
                                       " valid pseudo-GT pixels): " + e.what(),
                                   i, labels.valid_count());
      }
      const TripletLossResult<float> r = triplet_loss<float>(batch, state.net, margin);
      loss_sum += r.loss;
      report.active_triplets += r.active;
      ++steps;
      std::vector<float> params = state.net.parameters();
      adam_step<float>(params, r.gradient, state.adam);
      state.net.set_parameters(params);
    }
  }

  const MatchConfig mc = cfg.match(MatchMode::trained);
  std::vector<DisparityMap> dense;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [left, right] = state.normalized[i];
    const StereoPrediction pred =
        predict_from_features(extract_pair(left, right, state.net.extractor), mc, &state.net.head);
    store_labels(state, i, pred, cfg);
    if (state.record_predictions) dense.push_back(pred.left);
  }
  if (state.record_predictions) state.prediction_history.push_back(std::move(dense));

  report.mean_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
  report.inconsistent = total_inconsistent(state);
  state.epoch = report.epoch;
  state.loss_history.push_back(report.mean_loss);
  state.inconsistency_history.push_back(report.inconsistent);
  return report;
}

std::string checkpoint_name(int epoch) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "checkpoint_%04d.sada", epoch);
  return buf;
}

TrainState fit(const StereoPairSet& pairs, const TrainConfig& cfg, const FitHooks& hooks) {
  TrainState state = TrainState::create(pairs, cfg);
  state.record_predictions = hooks.record_predictions;
  std::ofstream csv;
  if (!hooks.out_dir.empty()) {
    std::filesystem::create_directories(hooks.out_dir);
    csv.open(hooks.out_dir / "convergence.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot write convergence log in '" + hooks.out_dir.string() + "'");
    csv << "epoch,loss,inconsistent\n";
  }

  initialize_pseudo_gt(pairs, state, cfg);
  std::size_t total_pixels = 0;
  for (const auto& p : pairs) total_pixels += p.left.size();
  if (hooks.log && (total_pixels - state.initial_inconsistent) * 100 < total_pixels) {
    *hooks.log << "warning: epoch-0 pseudo ground truth keeps under 1% of pixels ("
               << (total_pixels - state.initial_inconsistent) << " of " << total_pixels << ")\n";
  }

  std::vector<std::size_t> series{state.initial_inconsistent};
  for (int e = 0; e < cfg.max_epochs; ++e) {
    EpochReport report = train_epoch(pairs, state, cfg);
    if (hooks.inconsistency_override) {
      report.inconsistent = hooks.inconsistency_override(report.epoch, report.inconsistent);
      state.inconsistency_history.back() = report.inconsistent;
    }
    series.push_back(report.inconsistent);
    if (csv.is_open()) {
      csv << report.epoch << ',' << format_loss(report.mean_loss) << ',' << report.inconsistent
          << '\n';
      csv.flush();
    }
    if (!hooks.out_dir.empty() && report.epoch % cfg.checkpoint_every == 0) {
      write_checkpoint(to_checkpoint(state.net, &state.adam), hooks.out_dir / checkpoint_name(report.epoch));
    }
    if (hooks.log) {
      *hooks.log << "epoch " << report.epoch << " loss " << format_loss(report.mean_loss)
                 << " inconsistent " << report.inconsistent << "\n";
    }
    if (hooks.on_epoch) hooks.on_epoch(report, state);
    if (count_history_should_stop(series, static_cast<std::size_t>(cfg.patience))) break;
  }

  if (!hooks.out_dir.empty()) {
    write_checkpoint(to_checkpoint(state.net, &state.adam), hooks.out_dir / "final.sada");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "pair_%03zu_left.pfm", i);
      write_pfm(state.pseudo_gt[i].sparse, hooks.out_dir / name);
      std::snprintf(name, sizeof(name), "pair_%03zu_right.pfm", i);
      write_pfm(state.right_pseudo_gt[i], hooks.out_dir / name);
    }
  }
  return state;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson: series differ in length");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> point_error_history(const TrainState& state, std::span<const DisparityMap> gt,
                                        double tau) {
  std::vector<double> out;
  out.reserve(state.prediction_history.size());
  for (const auto& epoch_maps : state.prediction_history) {
    if (epoch_maps.size() != gt.size()) throw ShapeError("ground truth count differs from pair count");
    std::size_t bad = 0, joint = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const DisparityMap& pred = epoch_maps[i];
      if (pred.width != gt[i].width || pred.height != gt[i].height) {
        throw ShapeError("ground truth size differs from prediction");
      }
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!pred.valid[p] || !gt[i].valid[p]) continue;
        ++joint;
        if (std::abs(static_cast<double>(gt[i].values[p]) - pred.values[p]) >= tau) ++bad;
      }
    }
    if (joint == 0) throw UndefinedMetricError("no jointly valid pixel in epoch prediction");
    out.push_back(100.0 * static_cast<double>(bad) / static_cast<double>(joint));
  }
  return out;
}

double track_correlation(const TrainState& state, std::span<const DisparityMap> gt, double tau) {
  if (state.inconsistency_history.size() < 3) {
    throw ArgumentError("track_correlation needs at least 3 epochs of history");
  }
  if (state.prediction_history.size() != state.inconsistency_history.size()) {
    throw ArgumentError("per-epoch predictions were not recorded");
  }
  const std::vector<double> errors = point_error_history(state, gt, tau);
  std::vector<double> counts(state.inconsistency_history.begin(), state.inconsistency_history.end());
  return pearson(counts, errors);
}

}  // namespace sada
