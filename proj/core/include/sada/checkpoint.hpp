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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sada/nncore.hpp"

namespace sada {

/// Binary weight file, all integers and floats little-endian:
///
///   "SADA"  u32 version  u32 layer_count
///   layer_count × { u32 in, u32 out, u32 kernel, u32 padding_tag }
///   layer_count × { f32 weight[out*in*k*k], f32 bias[out] }
///   u8 has_adam
///   if has_adam: u64 step, f64 lr, f64 beta1, f64 beta2, f64 epsilon,
///                u64 n, f32 m[n], f32 v[n]
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<ConvLayer<float>> layers;
  std::optional<AdamState<float>> adam;
};

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace sada
