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
#include <iosfwd>
#include <vector>

#include "sada/trainer.hpp"

namespace sada::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitTrainingAborted = 3,
  kExitUndefinedMetric = 4,
};

/// Reads "left<TAB>right" lines. Relative paths resolve against the list
/// file's directory; blank lines and '#' comments are skipped.
std::vector<std::pair<std::filesystem::path, std::filesystem::path>> read_pairs_list(
    const std::filesystem::path& list);

/// Full command-line entry point. Never throws; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sada::cli
