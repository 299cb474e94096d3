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

#include <benchmark/benchmark.h>

#include <random>

#include "sada/matcher.hpp"
#include "sada/model.hpp"
#include "sada/nncore.hpp"
#include "sada/sampler.hpp"

namespace {

sada::GrayImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  sada::GrayImage img(w, h);
  for (float& v : img.data) v = dist(rng);
  return img;
}

void BM_ConvForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  sada::ConvLayer<float> layer(60, 60, 3);
  sada::glorot_uniform_init(layer, rng);
  sada::Tensor<float> input(1, 60, size, size, 0.5f);
  for (auto _ : state) benchmark::DoNotOptimize(sada::conv2d_forward(input, layer));
  state.SetItemsProcessed(state.iterations() * (size - 2) * (size - 2));
}
BENCHMARK(BM_ConvForward)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ConvBackward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  sada::ConvLayer<float> layer(60, 60, 3);
  sada::glorot_uniform_init(layer, rng);
  sada::Tensor<float> input(1, 60, size, size, 0.5f);
  sada::Tensor<float> grad(1, 60, size - 2, size - 2, 0.1f);
  for (auto _ : state) benchmark::DoNotOptimize(sada::conv2d_backward(input, layer, grad));
}
BENCHMARK(BM_ConvBackward)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_TripletLoss(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto net = sada::StereoNet<float>::random(rng);
  const sada::GrayImage left = noise_image(64, 64, 4);
  sada::DisparityMap gt(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) gt.set(x, y, 3.0f);
  sada::SamplerConfig cfg;
  cfg.batch_size = static_cast<int>(state.range(0));
  sada::SamplerRng srng(5);
  const auto batch = sada::sample_batch(left, left, gt, cfg, srng);
  for (auto _ : state) benchmark::DoNotOptimize(sada::triplet_loss<float>(batch, net));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TripletLoss)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_ExtractFeatures(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const auto net = sada::StereoNet<float>::random(rng);
  const sada::GrayImage img = noise_image(128, 128, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(sada::extract_features(img, net.extractor, sada::FeatureMode::same));
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

void BM_CostVolume(benchmark::State& state) {
  std::mt19937_64 rng(8);
  const auto net = sada::StereoNet<float>::random(rng);
  const auto features = sada::extract_pair(sada::normalize_image(noise_image(128, 128, 9)),
                                           sada::normalize_image(noise_image(128, 128, 10)),
                                           net.extractor);
  const sada::MatchConfig cfg{16, state.range(0) == 0 ? sada::MatchMode::cosine : sada::MatchMode::trained};
  for (auto _ : state)
    benchmark::DoNotOptimize(sada::build_cost_volume(features.left, features.right, cfg, &net.head,
                                                     sada::Direction::left));
}
BENCHMARK(BM_CostVolume)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
