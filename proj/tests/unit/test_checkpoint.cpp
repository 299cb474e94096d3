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

#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "sada/checkpoint.hpp"
#include "sada/error.hpp"
#include "sada/model.hpp"
#include "scratch.hpp"

using namespace sada;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("network and optimizer round trip exactly") {
  const auto dir = sada::testing::scratch_dir("ckpt_rt");
  std::mt19937_64 rng(1);
  const auto net = StereoNet<float>::random(rng);
  AdamState<float> adam(net.parameter_count(), 6e-5);
  adam.step = 42;
  std::normal_distribution<float> n(0.0f, 1.0f);
  for (float& m : adam.m) m = n(rng);
  for (float& v : adam.v) v = std::abs(n(rng));
  write_checkpoint(to_checkpoint(net, &adam), dir / "a.sada");
  const Checkpoint back = read_checkpoint(dir / "a.sada");
  REQUIRE(back.adam.has_value());
  CHECK(back.adam->step == 42);
  CHECK(back.adam->lr == 6e-5);
  CHECK(back.adam->beta2 == 0.999);
  CHECK(back.adam->m == adam.m);
  CHECK(back.adam->v == adam.v);
  const StereoNet<float> restored = net_from_checkpoint(back);
  CHECK(restored.parameters() == net.parameters());
  CHECK(restored.extractor.layers[1].padding == Padding::valid);
}

TEST_CASE("file layout starts with the magic and version") {
  const auto dir = sada::testing::scratch_dir("ckpt_layout");
  Checkpoint c;
  c.layers.emplace_back(1, 2, 3, Padding::reflect_same);
  c.layers[0].weight.assign(18, 0.5f);
  write_checkpoint(c, dir / "l.sada");
  const std::string bytes = slurp(dir / "l.sada");
  CHECK(bytes.substr(0, 4) == "SADA");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  // header 12 + layer table 16 + weights 18*4 + bias 2*4 + adam flag 1
  CHECK(bytes.size() == 12 + 16 + 72 + 8 + 1);
  CHECK(bytes.back() == 0);
  CHECK(bytes[24] == 1);  // padding tag
  const Checkpoint back = read_checkpoint(dir / "l.sada");
  CHECK_FALSE(back.adam.has_value());
  CHECK(back.layers[0].weight == c.layers[0].weight);
}

TEST_CASE("corrupt files are rejected") {
  const auto dir = sada::testing::scratch_dir("ckpt_bad");
  std::mt19937_64 rng(2);
  write_checkpoint(to_checkpoint(StereoNet<float>::random(rng)), dir / "ok.sada");
  const std::string good = slurp(dir / "ok.sada");

  spit(dir / "magic.sada", "XXXX" + good.substr(4));
  CHECK_THROWS_AS(read_checkpoint(dir / "magic.sada"), FormatError);

  std::string v = good;
  v[4] = 9;
  spit(dir / "ver.sada", v);
  CHECK_THROWS_AS(read_checkpoint(dir / "ver.sada"), FormatError);

  spit(dir / "short.sada", good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(dir / "short.sada"), FormatError);

  spit(dir / "long.sada", good + "x");
  CHECK_THROWS_AS(read_checkpoint(dir / "long.sada"), FormatError);

  std::string k = good;
  k[12 + 8] = 4;  // even kernel size in the first layer
  spit(dir / "kernel.sada", k);
  CHECK_THROWS_AS(read_checkpoint(dir / "kernel.sada"), FormatError);

  CHECK_THROWS_AS(read_checkpoint(dir / "missing.sada"), IoError);
}

TEST_CASE("architecture mismatch is rejected on load") {
  Checkpoint c;
  c.layers.emplace_back(1, 60, 3);
  CHECK_THROWS_AS(net_from_checkpoint(c), FormatError);
}

}  // TEST_SUITE
