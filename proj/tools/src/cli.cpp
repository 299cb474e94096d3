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

#include "sada/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "sada/checkpoint.hpp"
#include "sada/consistency.hpp"
#include "sada/error.hpp"
#include "sada/imgio.hpp"
#include "sada/matcher.hpp"
#include "sada/parallel.hpp"
#include "sada/postproc.hpp"
#include "sada/run_config.hpp"

namespace sada::cli {
namespace {

namespace fs = std::filesystem;

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> assignments;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "flat key = value configuration file");
    cmd.add_option("--set", assignments, "override one key, e.g. --set lr=1e-4")->allow_extra_args(false);
  }

  RunConfig resolve(const std::vector<std::pair<std::string, std::string>>& flags) const {
    RunConfig cfg = resolve_config(config_file, assignments, flags);
    if (cfg.threads) set_worker_count(*cfg.threads);
    return cfg;
  }
};

template <class T>
void push_flag(std::vector<std::pair<std::string, std::string>>& flags, const char* key,
               const std::optional<T>& value) {
  if (value) flags.emplace_back(key, std::to_string(*value));
}

int cmd_train(const std::string& pairs_file, const std::string& out_dir, const RunConfig& cfg,
              std::ostream& out, std::ostream& err) {
  const auto list = read_pairs_list(pairs_file);
  if (list.empty()) {
    err << "error: pairs list '" << pairs_file << "' contains no pairs\n";
    return kExitUsage;
  }
  StereoPairSet pairs;
  pairs.reserve(list.size());
  for (const auto& [l, r] : list) {
    StereoPair p{load_gray(l), load_gray(r)};
    if (p.left.width != p.right.width || p.left.height != p.right.height) {
      throw ShapeError("pair '" + l.string() + "' / '" + r.string() + "' differ in size");
    }
    pairs.push_back(std::move(p));
  }
  FitHooks hooks;
  hooks.out_dir = out_dir;
  hooks.log = &err;
  try {
    const TrainState state = fit(pairs, cfg.train, hooks);
    out << "trained " << state.epoch << " epochs; final inconsistent "
        << (state.inconsistency_history.empty() ? state.initial_inconsistent
                                                : state.inconsistency_history.back())
        << '\n';
  } catch (const TrainingAbortedError& e) {
    err << "training aborted: " << e.what() << " (pair " << e.pair_index << ", " << e.valid_count
        << " valid pixels)\n";
    return kExitTrainingAborted;
  }
  return kExitOk;
}

struct PredictArgs {
  std::string left, right, weights, out;
  bool lr_check = false;
  bool subpixel = false;
};

int cmd_predict(const PredictArgs& a, const RunConfig& cfg) {
  const GrayImage left = load_gray(a.left);
  const GrayImage right = load_gray(a.right);
  if (left.width != right.width || left.height != right.height) {
    throw ShapeError("left and right images differ in size");
  }
  const StereoNet<float> net = net_from_checkpoint(read_checkpoint(a.weights));
  const StereoPrediction pred = predict_both(left, right, net, cfg.match());
  DisparityMap result = pred.left;
  if (a.lr_check) result = lr_check(pred.left, pred.right, cfg.train.consistency()).sparse;
  if (a.subpixel) result = subpixel_refine(pred.left_volume, result, cfg.subpixel);
  write_pfm(result, a.out);
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const RunConfig& cfg,
             std::ostream& out) {
  const DisparityMap pred = read_pfm(pred_path);
  const DisparityMap gt = read_pfm(gt_path);
  write_metrics_csv(out, pred, gt, cfg.taus, true);
  return kExitOk;
}

int cmd_viz(const std::string& in, const std::string& out) {
  render_colormap(read_pfm(in), out);
  return kExitOk;
}

}  // namespace

std::vector<std::pair<fs::path, fs::path>> read_pairs_list(const fs::path& list) {
  std::ifstream in(list);
  if (!in) throw IoError("cannot open pairs list '" + list.string() + "'");
  const fs::path base = list.parent_path();
  auto resolve = [&](std::string s) {
    fs::path p(std::move(s));
    return p.is_absolute() || base.empty() ? p : base / p;
  };
  std::vector<std::pair<fs::path, fs::path>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ArgumentError("pairs list line " + std::to_string(line_no) +
                          ": expected 'left<TAB>right'");
    }
    out.emplace_back(resolve(line.substr(0, tab)), resolve(line.substr(tab + 1)));
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-supervised stereo matching: train, predict, eval, viz"};
  app.name("sada");
  app.require_subcommand(1);
  app.set_version_flag("--version", "sada 0.1.0");

  auto* train = app.add_subcommand("train", "train on stereo pairs, writing checkpoints and labels");
  std::string pairs_file, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs, train_dmax;
  ConfigArgs train_cfg;
  train->add_option("--pairs", pairs_file, "list file of left<TAB>right paths")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--seed", seed, "random seed");
  train->add_option("--max-epochs", max_epochs, "epoch cap");
  train->add_option("--dmax", train_dmax, "disparity search range");
  train_cfg.attach(*train);

  auto* predict = app.add_subcommand("predict", "compute a disparity map for one pair");
  PredictArgs pa;
  std::optional<int> predict_dmax;
  std::string mode;
  ConfigArgs predict_cfg;
  predict->add_option("--left", pa.left, "left image (PGM or PNG)")->required();
  predict->add_option("--right", pa.right, "right image")->required();
  predict->add_option("--weights", pa.weights, "checkpoint file")->required();
  predict->add_option("--out", pa.out, "output PFM")->required();
  predict->add_flag("--lr-check", pa.lr_check, "mask left-right inconsistent pixels");
  predict->add_flag("--subpixel", pa.subpixel, "sub-pixel refinement of kept pixels");
  predict->add_option("--dmax", predict_dmax, "disparity search range");
  predict->add_option("--mode", mode, "cosine or trained similarity")
      ->check(CLI::IsMember({"cosine", "trained"}));
  predict_cfg.attach(*predict);

  auto* eval = app.add_subcommand("eval", "print point error and completion as CSV");
  std::string pred_path, gt_path, tau_list;
  ConfigArgs eval_cfg;
  eval->add_option("--pred", pred_path, "predicted PFM")->required();
  eval->add_option("--gt", gt_path, "ground truth PFM")->required();
  eval->add_option("--tau", tau_list, "comma separated thresholds, default 1,2,3,4");
  eval_cfg.attach(*eval);

  auto* viz = app.add_subcommand("viz", "render a PFM disparity map as a color PNG");
  std::string viz_in, viz_out;
  viz->add_option("--in", viz_in)->required();
  viz->add_option("--out", viz_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::vector<std::pair<std::string, std::string>> flags;
    if (*train) {
      push_flag(flags, "seed", seed);
      push_flag(flags, "max_epochs", max_epochs);
      push_flag(flags, "dmax", train_dmax);
      const RunConfig cfg = train_cfg.resolve(flags);
      cfg.train.validate();
      return cmd_train(pairs_file, out_dir, cfg, out, err);
    }
    if (*predict) {
      push_flag(flags, "dmax", predict_dmax);
      if (!mode.empty()) flags.emplace_back("match_mode", mode);
      return cmd_predict(pa, predict_cfg.resolve(flags));
    }
    if (*eval) {
      if (!tau_list.empty()) flags.emplace_back("tau", tau_list);
      return cmd_eval(pred_path, gt_path, eval_cfg.resolve(flags), out);
    }
    return cmd_viz(viz_in, viz_out);
  } catch (const UndefinedMetricError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUndefinedMetric;
  } catch (const TrainingAbortedError& e) {
    err << "training aborted: " << e.what() << '\n';
    return kExitTrainingAborted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace sada::cli
