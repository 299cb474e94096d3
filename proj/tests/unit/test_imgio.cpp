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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sada/error.hpp"
#include "sada/imgio.hpp"
#include "scratch.hpp"

using namespace sada;
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void truncate_to(const fs::path& p, std::size_t n) {
  auto bytes = slurp(p);
  bytes.resize(n);
  spit(p, std::string(bytes.begin(), bytes.end()));
}

DisparityMap random_map(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 64.0f);
  std::bernoulli_distribution keep(0.7);
  DisparityMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (keep(rng)) m.set(x, y, u(rng));
  return m;
}

}  // namespace

TEST_SUITE("imgio") {

TEST_CASE("8-bit PGM bytes scale by maxval") {
  const auto dir = sada::testing::scratch_dir("imgio_pgm8");
  spit(dir / "a.pgm", std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
  const GrayImage img = load_gray(dir / "a.pgm");
  REQUIRE(img.width == 2);
  REQUIRE(img.height == 2);
  CHECK(img.at(0, 0) == 0.0f);
  CHECK(img.at(1, 0) == 1.0f);
  CHECK(img.at(0, 1) == doctest::Approx(128.0 / 255.0));
  CHECK(img.at(1, 1) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("PGM header comments and 16-bit samples") {
  const auto dir = sada::testing::scratch_dir("imgio_pgm16");
  spit(dir / "b.pgm", std::string("P5\n# note\n2 1\n65535\n") + std::string("\xff\xff\x80\x00", 4));
  const GrayImage img = load_gray(dir / "b.pgm");
  CHECK(img.at(0, 0) == 1.0f);
  CHECK(img.at(1, 0) == doctest::Approx(32768.0 / 65535.0));
}

TEST_CASE("write_pgm emits the expected bytes") {
  const auto dir = sada::testing::scratch_dir("imgio_pgm_write");
  GrayImage img(2, 1);
  img.data = {0.0f, 1.0f};
  write_pgm(img, dir / "o.pgm");
  const auto bytes = slurp(dir / "o.pgm");
  const std::string expect = std::string("P5\n2 1\n255\n") + std::string("\x00\xff", 2);
  CHECK(std::string(bytes.begin(), bytes.end()) == expect);
  write_pgm(img, dir / "o16.pgm", 16);
  const GrayImage back = load_gray(dir / "o16.pgm");
  CHECK(back.data == img.data);
}

TEST_CASE("16-bit PNG full scale loads as 1.0") {
  const auto dir = sada::testing::scratch_dir("imgio_png16");
  GrayImage img(3, 2, 1.0f);
  img.at(0, 0) = 0.0f;
  write_gray_png(img, dir / "a.png", 16);
  const GrayImage back = load_gray(dir / "a.png");
  CHECK(back.at(1, 0) == 1.0f);
  CHECK(back.at(0, 0) == 0.0f);
}

TEST_CASE("8-bit PNG round trip on quantized values") {
  const auto dir = sada::testing::scratch_dir("imgio_png8");
  GrayImage img(4, 4);
  for (int i = 0; i < 16; ++i) img.data[i] = static_cast<float>(i * 17) / 255.0f;
  write_gray_png(img, dir / "a.png");
  const GrayImage back = load_gray(dir / "a.png");
  for (int i = 0; i < 16; ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-6));
}

TEST_CASE("color input reduces by the unweighted channel mean") {
  const auto dir = sada::testing::scratch_dir("imgio_rgb");
  DisparityMap m(1, 1);
  m.set(0, 0, 3.0f);
  render_colormap(m, dir / "c.png");
  const Rgb mid = colormap_at(0.5);
  const GrayImage g = load_gray(dir / "c.png");
  CHECK(g.at(0, 0) == doctest::Approx((mid.r + mid.g + mid.b) / 3.0 / 255.0));

  spit(dir / "c.ppm", std::string("P6\n1 1\n255\n") + std::string("\x00\x30\x60", 3));
  CHECK(load_gray(dir / "c.ppm").at(0, 0) == doctest::Approx(0x30 / 255.0));
}

TEST_CASE("truncated files raise I/O errors") {
  const auto dir = sada::testing::scratch_dir("imgio_trunc");
  GrayImage img(8, 8, 0.5f);
  write_pgm(img, dir / "t.pgm");
  truncate_to(dir / "t.pgm", 20);
  CHECK_THROWS_AS(load_gray(dir / "t.pgm"), IoError);

  write_gray_png(img, dir / "t.png");
  const auto size = fs::file_size(dir / "t.png");
  truncate_to(dir / "t.png", size / 2);
  CHECK_THROWS_AS(load_gray(dir / "t.png"), IoError);

  DisparityMap m(4, 4);
  write_pfm(m, dir / "t.pfm");
  truncate_to(dir / "t.pfm", fs::file_size(dir / "t.pfm") - 3);
  CHECK_THROWS_AS(read_pfm(dir / "t.pfm"), IoError);

  CHECK_THROWS_AS(load_gray(dir / "missing.pgm"), IoError);
}

TEST_CASE("unknown formats are rejected") {
  const auto dir = sada::testing::scratch_dir("imgio_unknown");
  spit(dir / "x.bin", "GIF89a-not-supported");
  CHECK_THROWS_AS(load_gray(dir / "x.bin"), FormatError);
}

TEST_CASE("load_gray output lies in the unit interval") {
  const auto dir = sada::testing::scratch_dir("imgio_range");
  std::mt19937_64 rng(1);
  std::string payload(64 * 2, '\0');
  for (char& c : payload) c = static_cast<char>(rng() & 0xff);
  spit(dir / "r.pgm", "P5\n8 8\n65535\n" + payload);
  for (float v : load_gray(dir / "r.pgm").data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("PFM header and payload for a single valid pixel") {
  const auto dir = sada::testing::scratch_dir("imgio_pfm1");
  DisparityMap m(1, 1);
  m.set(0, 0, 5.0f);
  write_pfm(m, dir / "a.pfm");
  const auto bytes = slurp(dir / "a.pfm");
  const std::string header = "Pf\n1 1\n-1.0\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(5.0f);
  for (int i = 0; i < 4; ++i) CHECK(bytes[header.size() + i] == ((bits >> (8 * i)) & 0xffu));

  const DisparityMap back = read_pfm(dir / "a.pfm");
  CHECK(back.is_valid(0, 0));
  CHECK(back.value(0, 0) == 5.0f);
}

TEST_CASE("invalid PFM cells are stored as +inf and read back invalid") {
  const auto dir = sada::testing::scratch_dir("imgio_pfm_inf");
  DisparityMap m(1, 1);
  m.invalidate(0, 0);
  write_pfm(m, dir / "a.pfm");
  const auto bytes = slurp(dir / "a.pfm");
  float payload = 0.0f;
  std::memcpy(&payload, bytes.data() + bytes.size() - 4, 4);
  CHECK(std::isinf(payload));
  CHECK(payload > 0.0f);
  CHECK_FALSE(read_pfm(dir / "a.pfm").is_valid(0, 0));
}

TEST_CASE("PFM rows are stored bottom to top") {
  const auto dir = sada::testing::scratch_dir("imgio_pfm_rows");
  DisparityMap m(1, 2);
  m.set(0, 0, 1.0f);
  m.set(0, 1, 2.0f);
  write_pfm(m, dir / "a.pfm");
  const auto bytes = slurp(dir / "a.pfm");
  float first = 0.0f;
  std::memcpy(&first, bytes.data() + bytes.size() - 8, 4);
  CHECK(first == 2.0f);
}

TEST_CASE("PFM round trip is bit exact") {
  const auto dir = sada::testing::scratch_dir("imgio_pfm_rt");
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const DisparityMap m = random_map(7 + trial, 5 + 2 * trial, rng);
    write_pfm(m, dir / "m.pfm");
    const DisparityMap back = read_pfm(dir / "m.pfm");
    REQUIRE(back.width == m.width);
    REQUIRE(back.height == m.height);
    CHECK(back.valid == m.valid);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.valid[i]) CHECK(std::bit_cast<std::uint32_t>(back.values[i]) == std::bit_cast<std::uint32_t>(m.values[i]));
    }
  }
}

TEST_CASE("color PFM and big-endian PFM") {
  const auto dir = sada::testing::scratch_dir("imgio_pfm_fmt");
  spit(dir / "c.pfm", std::string("PF\n1 1\n-1.0\n") + std::string(12, '\0'));
  CHECK_THROWS_AS(read_pfm(dir / "c.pfm"), FormatError);

  const std::uint32_t bits = std::bit_cast<std::uint32_t>(3.5f);
  std::string be(4, '\0');
  for (int i = 0; i < 4; ++i) be[i] = static_cast<char>((bits >> (8 * (3 - i))) & 0xff);
  spit(dir / "be.pfm", "Pf\n1 1\n1.0\n" + be);
  const DisparityMap m = read_pfm(dir / "be.pfm");
  CHECK(m.is_valid(0, 0));
  CHECK(m.value(0, 0) == 3.5f);
}

TEST_CASE("colormap of an all-invalid map is black") {
  const auto dir = sada::testing::scratch_dir("imgio_cmap_black");
  DisparityMap m(3, 2);
  render_colormap(m, dir / "k.png");
  int w = 0, h = 0;
  const auto px = read_rgb_png(dir / "k.png", w, h);
  CHECK(w == 3);
  CHECK(h == 2);
  for (const Rgb& c : px) CHECK(c == Rgb{0, 0, 0});
}

TEST_CASE("constant map renders at the ramp midpoint") {
  DisparityMap m(2, 2);
  for (int i = 0; i < 4; ++i) m.set(i % 2, i / 2, 9.0f);
  m.invalidate(1, 1);
  const auto px = colorize(m);
  CHECK(px[0] == colormap_at(0.5));
  CHECK(px[1] == colormap_at(0.5));
  CHECK(px[3] == Rgb{0, 0, 0});
}

TEST_CASE("two-value map renders the ramp endpoints") {
  const auto dir = sada::testing::scratch_dir("imgio_cmap_ends");
  DisparityMap m(2, 1);
  m.set(0, 0, 0.0f);
  m.set(1, 0, 64.0f);
  render_colormap(m, dir / "e.png");
  int w = 0, h = 0;
  const auto px = read_rgb_png(dir / "e.png", w, h);
  CHECK(px[0] == colormap_at(0.0));
  CHECK(px[1] == colormap_at(1.0));
  CHECK_FALSE(colormap_at(0.0) == colormap_at(1.0));
}

TEST_CASE("rendering never fails across mask densities") {
  const auto dir = sada::testing::scratch_dir("imgio_cmap_density");
  std::mt19937_64 rng(5);
  for (double p : {0.0, 0.01, 0.5, 1.0}) {
    std::bernoulli_distribution keep(p);
    DisparityMap m(9, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 9; ++x)
        if (keep(rng)) m.set(x, y, static_cast<float>(x));
    CHECK_NOTHROW(render_colormap(m, dir / "d.png"));
  }
}

}  // TEST_SUITE
