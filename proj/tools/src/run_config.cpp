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

#include "sada/run_config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "sada/error.hpp"

namespace sada::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ArgumentError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

int parse_count(std::string_view key, std::string_view value) {
  const long v = parse_int<long>(key, value);
  if (v < 1 || v > std::numeric_limits<int>::max()) bad_value(key, value);
  return static_cast<int>(v);
}

double parse_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string s(value);
    const double v = std::stod(s, &used);
    if (used != s.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "lr",           "margin",          "batch_size",         "batches_per_epoch",
      "max_epochs",   "patience",        "dmax",               "seed",
      "epoch0_mode",  "checkpoint_every", "neg_offset_min",    "neg_offset_max",
      "patch_size",   "lr_check_threshold", "match_mode",      "subpixel_variant",
      "subpixel_clamp", "tau",           "threads",
  };
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "lr") {
    train.lr = parse_double(key, value);
    if (!(train.lr >= 0.0)) bad_value(key, value);
  } else if (key == "margin") {
    train.margin = parse_double(key, value);
    if (!(train.margin > 0.0)) bad_value(key, value);
  } else if (key == "batch_size") {
    train.batch_size = parse_count(key, value);
  } else if (key == "batches_per_epoch") {
    train.batches_per_epoch = parse_count(key, value);
  } else if (key == "max_epochs") {
    train.max_epochs = parse_count(key, value);
  } else if (key == "patience") {
    train.patience = parse_count(key, value);
  } else if (key == "dmax") {
    train.dmax = parse_count(key, value);
  } else if (key == "seed") {
    train.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "epoch0_mode") {
    if (value == "feature-cosine") {
      train.epoch0_mode = Epoch0Mode::feature_cosine;
    } else if (value == "raw-cosine") {
      train.epoch0_mode = Epoch0Mode::raw_cosine;
    } else {
      bad_value(key, value);
    }
  } else if (key == "checkpoint_every") {
    train.checkpoint_every = parse_count(key, value);
  } else if (key == "neg_offset_min") {
    train.neg_offset_min = parse_count(key, value);
  } else if (key == "neg_offset_max") {
    train.neg_offset_max = parse_count(key, value);
  } else if (key == "patch_size") {
    // The extractor's receptive field fixes the training patch size.
    if (parse_count(key, value) != kPatchSize) bad_value(key, value);
  } else if (key == "lr_check_threshold") {
    train.lr_threshold = parse_double(key, value);
    if (!(train.lr_threshold > 0.0)) bad_value(key, value);
  } else if (key == "match_mode") {
    if (value == "cosine") {
      match_mode = MatchMode::cosine;
    } else if (value == "trained") {
      match_mode = MatchMode::trained;
    } else {
      bad_value(key, value);
    }
  } else if (key == "subpixel_variant") {
    if (value == "as-printed") {
      subpixel.variant = SubpixelVariant::as_printed;
    } else if (value == "symmetric") {
      subpixel.variant = SubpixelVariant::symmetric;
    } else {
      bad_value(key, value);
    }
  } else if (key == "subpixel_clamp") {
    subpixel.clamp_to_half = parse_bool(key, value);
  } else if (key == "tau") {
    taus = parse_tau_list(value);
  } else if (key == "threads") {
    threads = parse_int<std::size_t>(key, value);
  } else {
    throw ArgumentError("unknown configuration key '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ArgumentError("expected key=value, got '" + std::string(text) + "'");
  const std::string_view key = trim(text.substr(0, eq));
  const std::string_view value = trim(text.substr(eq + 1));
  if (key.empty() || value.empty()) throw ArgumentError("expected key=value, got '" + std::string(text) + "'");
  return {std::string(key), std::string(value)};
}

std::vector<double> parse_tau_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    const double tau = parse_double("tau", item);
    if (!(tau > 0.0)) bad_value("tau", item);
    out.push_back(tau);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

RunConfig resolve_config(const std::filesystem::path& config_file,
                         std::span<const std::string> assignments,
                         std::span<const std::pair<std::string, std::string>> flags) {
  RunConfig cfg;
  if (!config_file.empty()) {
    for (const auto& [k, v] : read_config_file(config_file)) cfg.set(k, v);
  }
  for (const auto& a : assignments) {
    const auto [k, v] = split_assignment(a);
    cfg.set(k, v);
  }
  for (const auto& [k, v] : flags) cfg.set(k, v);
  return cfg;
}

}  // namespace sada::cli
