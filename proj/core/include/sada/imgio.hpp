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
#include <vector>

namespace sada {

/// Single-channel intensity raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f);

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
};

/// Disparity raster with an explicit validity mask. Invalid cells carry no
/// meaningful value; no magic numbers are used internally.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h);

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  float value(int x, int y) const { return values[index(x, y)]; }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
  void set(int x, int y, float v) {
    values[index(x, y)] = v;
    valid[index(x, y)] = 1;
  }
  void invalidate(int x, int y) {
    values[index(x, y)] = 0.0f;
    valid[index(x, y)] = 0;
  }
  std::size_t size() const { return values.size(); }
  std::size_t valid_count() const;
};

/// Loads an 8/16-bit PGM (P5) or PNG. Intensities are scaled to [0,1]; color
/// PNGs are reduced by the unweighted channel mean.
GrayImage load_gray(const std::filesystem::path& path);

/// Writes a binary PGM (P5). 8-bit when bit_depth == 8, big-endian 16-bit when
/// 16. Values are clamped to [0,1] before quantization.
void write_pgm(const GrayImage& image, const std::filesystem::path& path, int bit_depth = 8);

/// Writes a grayscale PNG with the given bit depth (8 or 16).
void write_gray_png(const GrayImage& image, const std::filesystem::path& path,
                    int bit_depth = 8);

/// Middlebury PFM: "Pf", little-endian (scale -1.0), rows bottom to top,
/// invalid pixels stored as +inf.
void write_pfm(const DisparityMap& map, const std::filesystem::path& path);
DisparityMap read_pfm(const std::filesystem::path& path);

/// 8-bit RGB triple of the visualization ramp at t in [0,1].
struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};
Rgb colormap_at(double t);

/// Min-max normalizes valid pixels through a viridis-like ramp and renders
/// invalid pixels black. A constant map renders at the ramp midpoint.
std::vector<Rgb> colorize(const DisparityMap& map);
void render_colormap(const DisparityMap& map, const std::filesystem::path& path);

/// Reads an 8-bit RGB PNG back, for inspection and tests.
std::vector<Rgb> read_rgb_png(const std::filesystem::path& path, int& width, int& height);

}  // namespace sada
