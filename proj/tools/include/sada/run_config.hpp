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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sada/matcher.hpp"
#include "sada/postproc.hpp"
#include "sada/trainer.hpp"

namespace sada::cli {

/// Every tunable of the tool under one flat key namespace. Values are applied
/// in order: defaults, then a config file, then command-line overrides.
struct RunConfig {
  TrainConfig train;
  MatchMode match_mode = MatchMode::trained;
  SubpixelConfig subpixel;
  std::vector<double> taus{1.0, 2.0, 3.0, 4.0};
  /// Worker cap; unset defers to SADA_THREADS.
  std::optional<std::size_t> threads;

  /// Throws ArgumentError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);

  MatchConfig match() const { return {train.dmax, match_mode}; }

  static const std::vector<std::string>& keys();
};

/// Parses flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Splits "key=value" as given to --set.
std::pair<std::string, std::string> split_assignment(std::string_view text);

std::vector<double> parse_tau_list(std::string_view text);

/// Defaults, then `config_file` (when non-empty), then each "key=value" in
/// `assignments`, then `flags` in order. Later sources win.
RunConfig resolve_config(const std::filesystem::path& config_file,
                         std::span<const std::string> assignments,
                         std::span<const std::pair<std::string, std::string>> flags);

}  // namespace sada::cli
