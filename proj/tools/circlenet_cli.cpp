// Copyright 2026 The circlenet Authors
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


// circlenet command-line tool. Run `circlenet --help` for the subcommands.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "circlenet/decode.hpp"
#include "circlenet/encode.hpp"
#include "circlenet/eval.hpp"
#include "circlenet/geometry.hpp"
#include "circlenet/io.hpp"
#include "circlenet/losses.hpp"
#include "circlenet/parallel.hpp"
#include "circlenet/random.hpp"
#include "circlenet/reftrainer.hpp"
#include "circlenet/synth.hpp"

namespace {

using namespace circlenet;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

// Bad user input that is not covered by a library exception type.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

// Writes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Dataset load_dataset(const std::string& path) {
  auto in = open_in(path);
  return read_dataset(in);
}

std::vector<Prediction> load_predictions(const std::string& path) {
  auto in = open_in(path);
  return read_predictions(in);
}

OverlapMetric parse_metric(const std::string& s) {
  if (s == "ciou") return OverlapMetric::kCiou;
  if (s == "box" || s == "box_iou") return OverlapMetric::kBoxIou;
  throw InputError("unknown metric '" + s + "' (expected ciou or box)");
}

std::string format_opt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string f4(double v) { return format_opt(v); }

// Per-image seeds derived from one user seed.
std::vector<std::uint64_t> child_seeds(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<std::uint64_t> out(n);
  for (auto& s : out) s = rng.bits();
  return out;
}

// ---------------------------------------------------------------- ciou

void add_ciou(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("ciou", "Circle IOU of two circles given as x y r x y r");
  auto v = std::make_shared<std::vector<double>>();
  cmd->add_option("values", *v, "x1 y1 r1 x2 y2 r2")->expected(6)->required();
  cmd->callback([&run, v] {
    run = [v] {
      Circle a;
      Circle b;
      a.center = {(*v)[0], (*v)[1]};
      a.radius = (*v)[2];
      b.center = {(*v)[3], (*v)[4]};
      b.radius = (*v)[5];
      std::cout << fixed6(ciou(a, b)) << "\n";
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::uint64_t seed = 0;
  int images = 1;
  SceneConfig scene;
  std::string out;
};

void add_generate(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("generate", "Write a synthetic dataset file");
  auto a = std::make_shared<GenerateArgs>();
  cmd->add_option("--seed", a->seed, "Random seed")->required();
  cmd->add_option("--images", a->images, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--width", a->scene.image_w, "Image width")->capture_default_str();
  cmd->add_option("--height", a->scene.image_h, "Image height")->capture_default_str();
  cmd->add_option("--min-objects", a->scene.min_objects)->capture_default_str();
  cmd->add_option("--max-objects", a->scene.max_objects)->capture_default_str();
  cmd->add_option("--min-radius", a->scene.min_radius)->capture_default_str();
  cmd->add_option("--max-radius", a->scene.max_radius)->capture_default_str();
  cmd->add_option("--max-overlap", a->scene.max_pairwise_ciou, "Largest allowed pairwise ciou")
      ->capture_default_str();
  cmd->add_option("--classes", a->scene.classes)->capture_default_str();
  cmd->add_option("-o,--out", a->out, "Output file (default stdout)");
  cmd->callback([&run, a] {
    run = [a] {
      const auto seeds = child_seeds(a->seed, static_cast<std::size_t>(a->images));
      std::vector<Scene> scenes(seeds.size());
      try {
        parallel_for(seeds.size(), [&](std::size_t k) {
          SceneConfig cfg = a->scene;
          cfg.seed = seeds[k];
          scenes[k] = generate_scene(cfg);
        });
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::runtime_error& e) {
        throw InputError(e.what());
      }
      Output out(a->out);
      write_dataset(out.stream(), dataset_from_scenes(scenes));
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- perturb

struct PerturbArgs {
  std::string gt;
  std::string out;
  PerturbConfig cfg;
};

void add_perturb(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("perturb", "Simulate detections from a dataset's ground truth");
  auto a = std::make_shared<PerturbArgs>();
  cmd->add_option("--gt", a->gt, "Dataset file")->required();
  cmd->add_option("--seed", a->cfg.seed, "Random seed")->required();
  cmd->add_option("--center-sigma", a->cfg.center_sigma, "Centre jitter sigma (pixels)")->capture_default_str();
  cmd->add_option("--radius-jitter", a->cfg.radius_jitter, "Radius jitter sigma (fraction)")->capture_default_str();
  cmd->add_option("--drop-rate", a->cfg.drop_rate)->capture_default_str();
  cmd->add_option("--spurious-rate", a->cfg.spurious_rate)->capture_default_str();
  cmd->add_option("--score-noise", a->cfg.score_noise)->capture_default_str();
  cmd->add_option("--spurious-score-max", a->cfg.spurious_score_max)->capture_default_str();
  cmd->add_option("-o,--out", a->out, "Output prediction file (default stdout)");
  cmd->callback([&run, a] {
    run = [a] {
      const Dataset ds = load_dataset(a->gt);
      const auto grouped = group_by_image(ds, {});
      const auto seeds = child_seeds(a->cfg.seed, grouped.size());
      std::vector<std::vector<Circle>> per_image(grouped.size());
      parallel_for(grouped.size(), [&](std::size_t k) {
        PerturbConfig cfg = a->cfg;
        cfg.seed = seeds[k];
        cfg.image_w = grouped[k].width;
        cfg.image_h = grouped[k].height;
        per_image[k] = perturb_detections(grouped[k].gts, cfg);
      });
      std::vector<Prediction> preds;
      for (std::size_t k = 0; k < grouped.size(); ++k) {
        for (const Circle& c : per_image[k]) preds.push_back({grouped[k].image_id, c});
      }
      Output out(a->out);
      write_predictions(out.stream(), preds);
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string metric = "ciou";
  std::vector<double> thresholds;
  double small_max = 32.0 * 32.0;
  double medium_max = 96.0 * 96.0;
  std::string out;
  std::string pr_out;
};

MatchConfig match_config(const EvalArgs& a) {
  MatchConfig cfg;
  cfg.metric = parse_metric(a.metric);
  if (!a.thresholds.empty()) cfg.thresholds = a.thresholds;
  cfg.area_ranges = {{"all", 0.0, std::numeric_limits<double>::infinity()},
                     {"small", 0.0, a.small_max},
                     {"medium", a.small_max, a.medium_max}};
  return cfg;
}

void write_report(std::ostream& os, const EvalReport& r, const MatchConfig& cfg,
                  const std::vector<ImageRecords>& ims) {
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
  for (const auto& im : ims) {
    n_gt += im.gts.size();
    n_pred += im.preds.size();
  }
  os << "circlenet evaluation\n";
  os << "  metric       " << (cfg.metric == OverlapMetric::kCiou ? "ciou" : "box") << "\n";
  os << "  images       " << ims.size() << "\n";
  os << "  ground truth " << n_gt << "\n";
  os << "  predictions  " << n_pred << "\n\n";
  os << "  threshold  AP      TP     FP     FN\n";
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-9.2f  %.4f  %-5zu  %-5zu  %zu\n", r.thresholds[i],
                  r.per_threshold_ap[i], r.counts[i].tp, r.counts[i].fp, r.counts[i].fn);
    os << line;
  }
  os << "\n";
  os << "AP=" << f4(r.ap) << "\n";
  os << "AP50=" << f4(r.ap50) << "\n";
  os << "AP75=" << f4(r.ap75) << "\n";
  os << "AP_S=" << format_opt(r.ap_small) << "\n";
  os << "AP_M=" << format_opt(r.ap_medium) << "\n";
}

void add_eval(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("eval", "Score predictions against a dataset (AP family)");
  auto a = std::make_shared<EvalArgs>();
  cmd->add_option("--gt", a->gt, "Dataset file")->required();
  cmd->add_option("--pred", a->pred, "Prediction file")->required();
  cmd->add_option("--metric", a->metric, "ciou or box")->capture_default_str();
  cmd->add_option("--thresholds", a->thresholds, "Match thresholds (default 0.50:0.05:0.95)")->delimiter(',');
  cmd->add_option("--small-max", a->small_max, "Upper area bound of the small range")->capture_default_str();
  cmd->add_option("--medium-max", a->medium_max, "Upper area bound of the medium range")->capture_default_str();
  cmd->add_option("-o,--out", a->out, "Report file (default stdout)");
  cmd->add_option("--pr-out", a->pr_out, "Write the PR curves as a TSV table");
  cmd->callback([&run, a] {
    run = [a] {
      const MatchConfig cfg = match_config(*a);
      const Dataset ds = load_dataset(a->gt);
      const auto preds = load_predictions(a->pred);
      cross_validate(ds, preds);
      const auto ims = group_by_image(ds, preds);
      const EvalReport rep = evaluate(ims, cfg);
      Output out(a->out);
      write_report(out.stream(), rep, cfg, ims);
      if (!a->pr_out.empty()) {
        Output pr(a->pr_out);
        std::ostream& os = pr.stream();
        os << "# recall";
        for (double t : rep.thresholds) os << "\tprecision@" << fixed6(t).substr(0, 4);
        os << "\n";
        for (std::size_t k = 0; k < kRecallPoints; ++k) {
          os << fixed6(static_cast<double>(k) / 100.0);
          for (const auto& curve : rep.pr_curves) os << "\t" << fixed6(curve[k]);
          os << "\n";
        }
      }
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- froc

void add_froc(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("froc", "FROC table: score, FP per image, sensitivity");
  auto a = std::make_shared<EvalArgs>();
  auto threshold = std::make_shared<double>(0.5);
  cmd->add_option("--gt", a->gt, "Dataset file")->required();
  cmd->add_option("--pred", a->pred, "Prediction file")->required();
  cmd->add_option("--metric", a->metric, "ciou or box")->capture_default_str();
  cmd->add_option("--threshold", *threshold, "Match threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd->add_option("-o,--out", a->out, "Output file (default stdout)");
  cmd->callback([&run, a, threshold] {
    run = [a, threshold] {
      const Dataset ds = load_dataset(a->gt);
      const auto preds = load_predictions(a->pred);
      cross_validate(ds, preds);
      const auto ims = group_by_image(ds, preds);
      const auto pts = froc(ims, parse_metric(a->metric), *threshold);
      Output out(a->out);
      std::ostream& os = out.stream();
      os << "# score\tfp_per_image\tsensitivity\n";
      for (const auto& p : pts) {
        os << fixed6(p.score) << "\t" << fixed6(p.fp_per_image) << "\t" << fixed6(p.sensitivity) << "\n";
      }
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- encode / decode

struct EncodeArgs {
  std::string gt;
  std::string out;
  int stride = 4;
  std::optional<double> sigma;
  double min_overlap = 0.7;
};

EncoderConfig encoder_for(const ImageInfo& im, int classes, const EncodeArgs& a) {
  EncoderConfig cfg;
  cfg.input_w = im.width;
  cfg.input_h = im.height;
  cfg.stride = a.stride;
  cfg.num_classes = classes;
  cfg.sigma = a.sigma ? SigmaPolicy::fixed(*a.sigma) : SigmaPolicy::size_adaptive(a.min_overlap);
  return cfg;
}

int class_count(const Dataset& ds) {
  int classes = 1;
  for (const auto& an : ds.annotations) classes = std::max(classes, an.circle.category + 1);
  return classes;
}

void add_encode_options(CLI::App* cmd, EncodeArgs& a) {
  cmd->add_option("--stride", a.stride, "Output stride R")->capture_default_str();
  cmd->add_option("--sigma", a.sigma, "Fixed Gaussian sigma in output cells");
  cmd->add_option("--min-overlap", a.min_overlap, "Size-adaptive sigma overlap target")->capture_default_str();
}

void add_encode(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("encode", "Encode a dataset into heatmap/radius/offset targets");
  auto a = std::make_shared<EncodeArgs>();
  cmd->add_option("--gt", a->gt, "Dataset file")->required();
  add_encode_options(cmd, *a);
  cmd->add_option("-o,--out", a->out, "Targets file (default stdout)");
  cmd->callback([&run, a] {
    run = [a] {
      const Dataset ds = load_dataset(a->gt);
      const int classes = class_count(ds);
      const auto ims = group_by_image(ds, {});
      std::vector<TargetsBlock> blocks(ims.size());
      parallel_for(ims.size(), [&](std::size_t k) {
        blocks[k] = {ims[k].image_id, encode(ims[k].gts, encoder_for(ds.images[k], classes, *a))};
      });
      Output out(a->out);
      write_targets(out.stream(), blocks);
      return kExitOk;
    };
  });
}

struct DecodeArgs {
  std::string maps;
  std::string out;
  DecodeConfig cfg;
  std::optional<double> nms;
};

// Returns "targets" or "outputs" from the first maps header in the file.
std::string maps_kind(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.value("type", "") == "maps") return j.value("kind", "");
    break;
  }
  throw ValidationError({"line 1: expected a maps header"});
}

void add_decode(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("decode", "Decode output maps (or targets, as perfect maps) into predictions");
  auto a = std::make_shared<DecodeArgs>();
  cmd->add_option("--maps", a->maps, "Maps file from `encode` or `fit`")->required();
  cmd->add_option("--top-n", a->cfg.top_n, "Peaks kept per image")->capture_default_str();
  cmd->add_option("--threshold", a->cfg.score_threshold, "Minimum peak score")->capture_default_str();
  cmd->add_option("--nms", a->nms, "Apply ciou NMS at this threshold");
  cmd->add_option("-o,--out", a->out, "Prediction file (default stdout)");
  cmd->callback([&run, a] {
    run = [a] {
      DecodeConfig cfg = a->cfg;
      if (a->nms) {
        cfg.apply_nms = true;
        cfg.nms_threshold = *a->nms;
      }
      std::vector<OutputsBlock> blocks;
      auto in = open_in(a->maps);
      if (maps_kind(a->maps) == "targets") {
        for (const auto& t : read_targets(in)) {
          blocks.push_back({t.image_id, t.targets.stride, perfect_maps(t.targets)});
        }
      } else {
        blocks = read_outputs(in);
      }
      std::vector<std::vector<Circle>> per_image(blocks.size());
      parallel_for(blocks.size(), [&](std::size_t k) {
        DecodeConfig image_cfg = cfg;
        image_cfg.stride = blocks[k].stride;
        per_image[k] = decode_circles(blocks[k].maps, image_cfg);
      });
      std::vector<Prediction> preds;
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        for (const Circle& c : per_image[k]) preds.push_back({blocks[k].image_id, c});
      }
      Output out(a->out);
      write_predictions(out.stream(), preds);
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string gt;
  std::optional<std::int64_t> image_id;
  EncodeArgs enc;
  FitConfig fit;
  std::string init = "zeros";
  std::string trajectory;
  std::string maps_out;
  std::string preds_out;
  DecodeConfig dec;
};

void add_fit(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("fit", "Fit output maps to one image's targets by gradient descent");
  auto a = std::make_shared<FitArgs>();
  cmd->add_option("--gt", a->gt, "Dataset file")->required();
  cmd->add_option("--image-id", a->image_id, "Image to fit (default: first)");
  add_encode_options(cmd, a->enc);
  cmd->add_option("--steps", a->fit.steps)->capture_default_str();
  cmd->add_option("--lr", a->fit.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--init", a->init, "zeros or noise")->capture_default_str();
  cmd->add_option("--noise-sigma", a->fit.noise_sigma)->capture_default_str();
  cmd->add_option("--seed", a->fit.seed, "Seed for noise initialisation")->capture_default_str();
  cmd->add_option("--lambda-radius", a->fit.weights.lambda_radius)->capture_default_str();
  cmd->add_option("--lambda-off", a->fit.weights.lambda_off)->capture_default_str();
  cmd->add_option("--max-backtracks", a->fit.max_backtracks, "Step halvings per block (0: fixed step)")
      ->capture_default_str();
  cmd->add_option("--record-every", a->fit.record_every)->capture_default_str();
  cmd->add_option("--trajectory", a->trajectory, "Loss trajectory TSV (default stdout)");
  cmd->add_option("--maps-out", a->maps_out, "Write the fitted maps");
  cmd->add_option("--preds-out", a->preds_out, "Write the decoded predictions");
  cmd->add_option("--top-n", a->dec.top_n)->capture_default_str();
  cmd->add_option("--threshold", a->dec.score_threshold, "Decode score threshold")->capture_default_str();
  cmd->callback([&run, a] {
    run = [a] {
      FitConfig fit = a->fit;
      if (a->init == "zeros") {
        fit.init = FitConfig::Init::kZeros;
      } else if (a->init == "noise") {
        fit.init = FitConfig::Init::kNoise;
      } else {
        throw InputError("unknown --init '" + a->init + "' (expected zeros or noise)");
      }
      const Dataset ds = load_dataset(a->gt);
      if (ds.images.empty()) throw InputError("dataset has no images");
      const auto ims = group_by_image(ds, {});
      std::size_t k = 0;
      if (a->image_id) {
        while (k < ims.size() && ims[k].image_id != *a->image_id) ++k;
        if (k == ims.size()) throw InputError("no image with id " + std::to_string(*a->image_id));
      }
      const HeatmapTargets targets = encode(ims[k].gts, encoder_for(ds.images[k], class_count(ds), a->enc));
      const FitResult r = fit_maps(targets, fit);

      Output traj(a->trajectory);
      std::ostream& os = traj.stream();
      os << "# step\tL_k\tL_off\tL_radius\tL_det\n";
      for (const auto& s : r.trajectory) {
        os << s.step << "\t" << fixed6(s.focal) << "\t" << fixed6(s.offset) << "\t" << fixed6(s.radius)
           << "\t" << fixed6(s.total) << "\n";
      }
      if (!a->maps_out.empty()) {
        Output mo(a->maps_out);
        write_outputs(mo.stream(), {{ims[k].image_id, targets.stride, r.maps}});
      }
      if (!a->preds_out.empty()) {
        DecodeConfig dec = a->dec;
        dec.stride = targets.stride;
        std::vector<Prediction> preds;
        for (const Circle& c : decode_circles(r.maps, dec)) preds.push_back({ims[k].image_id, c});
        Output po(a->preds_out);
        write_predictions(po.stream(), preds);
      }
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- rotcheck

struct RotArgs {
  std::string gt;
  std::string dets;
  std::string rotated;
  int turns = 1;
  std::string metric = "ciou";
};

void add_rotcheck(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("rotcheck", "Rotation consistency of detections before/after a 90-degree rotation");
  auto a = std::make_shared<RotArgs>();
  cmd->add_option("--gt", a->gt, "Dataset file (image sizes; default detection set)")->required();
  cmd->add_option("--dets", a->dets, "Detections on the original images (default: ground truth)");
  cmd->add_option("--rotated", a->rotated,
                  "Detections on the rotated images, in rotated coordinates (default: the "
                  "original set rotated exactly)");
  cmd->add_option("--turns", a->turns, "Quarter turns applied to the images")->capture_default_str()->check(CLI::Range(1, 3));
  cmd->add_option("--metric", a->metric, "ciou or box")->capture_default_str();
  cmd->callback([&run, a] {
    run = [a] {
      const OverlapMetric metric = parse_metric(a->metric);
      const Dataset ds = load_dataset(a->gt);
      std::vector<ImageRecords> orig;
      if (a->dets.empty()) {
        orig = group_by_image(ds, {});
        for (auto& im : orig) im.preds = im.gts;
      } else {
        const auto p = load_predictions(a->dets);
        cross_validate(ds, p);
        orig = group_by_image(ds, p);
      }
      std::vector<ImageRecords> rot;
      if (!a->rotated.empty()) {
        const auto p = load_predictions(a->rotated);
        cross_validate(ds, p);
        rot = group_by_image(ds, p);
      }
      double matched = 0.0;
      double mean_count = 0.0;
      for (std::size_t k = 0; k < orig.size(); ++k) {
        const double w = orig[k].width;
        const double h = orig[k].height;
        std::vector<Circle> back;
        if (a->rotated.empty()) {
          for (const Circle& c : orig[k].preds) back.push_back(unrotate90(rotate90(c, w, h, a->turns), w, h, a->turns));
        } else {
          for (const Circle& c : rot[k].preds) back.push_back(unrotate90(c, w, h, a->turns));
        }
        const double m = 0.5 * static_cast<double>(orig[k].preds.size() + back.size());
        const double ratio = rotation_consistency(orig[k].preds, back, metric);
        if (m > 0.0) matched += std::round(ratio * m);
        mean_count += m;
      }
      const double consistency = mean_count > 0.0 ? matched / mean_count : 1.0;
      std::cout << "consistency=" << f4(consistency) << "\n";
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- displace

struct DisplaceArgs {
  double r = 20.0;
  double max = 100.0;
  int steps = 11;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string mode = "isotropic";
  std::string out;
};

void add_displace(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("displace", "Mean box IOU and ciou of a circle under random translations");
  auto a = std::make_shared<DisplaceArgs>();
  cmd->add_option("--r", a->r, "Circle radius")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--max", a->max, "Largest displacement")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--steps", a->steps, "Evenly spaced displacements from 0 to --max")->capture_default_str()->check(CLI::Range(2, 1000000));
  cmd->add_option("--trials", a->trials, "Random directions per displacement")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a->seed, "Seed for the directions")->capture_default_str();
  cmd->add_option("--mode", a->mode, "isotropic or axial")->capture_default_str();
  cmd->add_option("-o,--out", a->out, "Output TSV (default stdout)");
  cmd->callback([&run, a] {
    run = [a] {
      DisplacementMode mode;
      if (a->mode == "isotropic") {
        mode = DisplacementMode::kIsotropic;
      } else if (a->mode == "axial") {
        mode = DisplacementMode::kAxial;
      } else {
        throw InputError("unknown --mode '" + a->mode + "' (expected isotropic or axial)");
      }
      std::vector<double> d;
      for (int i = 0; i < a->steps; ++i) d.push_back(a->max * i / (a->steps - 1));
      Circle c;
      c.radius = a->r;
      const auto rows = displacement_study(c, d, a->trials, a->seed, mode);
      Output out(a->out);
      std::ostream& os = out.stream();
      os << "# displacement\tbox_iou\tciou\n";
      for (const auto& r : rows) {
        os << fixed6(r.displacement) << "\t" << fixed6(r.box_iou) << "\t" << fixed6(r.ciou) << "\n";
      }
      os << "# max_gap=" << fixed6(max_metric_gap(rows)) << "\n";
      return kExitOk;
    };
  });
}

// ---------------------------------------------------------------- mdt

void add_mdt(CLI::App& app, std::function<int()>& run) {
  auto* cmd = app.add_subcommand("mdt", "Mask/detection area ratio of annotated circles and boxes");
  auto gt = std::make_shared<std::string>();
  auto per_object = std::make_shared<std::string>();
  cmd->add_option("--gt", *gt, "Dataset file with segmentation masks")->required();
  cmd->add_option("--per-object", *per_object, "Write per-object ratios as TSV");
  cmd->callback([&run, gt, per_object] {
    run = [gt, per_object] {
      const Dataset ds = load_dataset(*gt);
      std::vector<PolygonMask> masks;
      std::vector<Circle> circles;
      std::vector<Box> boxes;
      std::vector<std::int64_t> ids;
      for (const auto& an : ds.annotations) {
        if (!an.mask) continue;
        masks.push_back(*an.mask);
        circles.push_back(an.circle);
        boxes.push_back(an.bbox ? *an.bbox : circle_to_tight_box(an.circle));
        ids.push_back(an.id);
      }
      if (masks.empty()) throw InputError("no annotation carries a segmentation mask");
      const MdtReport rc = mask_detection_ratio(masks, circles);
      const MdtReport rb = mask_detection_ratio(masks, boxes);
      std::cout << "objects=" << masks.size() << "\n";
      std::cout << "MDT_circle=" << f4(rc.mean) << "\n";
      std::cout << "MDT_box=" << f4(rb.mean) << "\n";
      std::cout << "skipped=" << rc.skipped + rb.skipped << "\n";
      if (!per_object->empty()) {
        Output out(*per_object);
        std::ostream& os = out.stream();
        os << "# annotation_id\tcircle_ratio\tbox_ratio\n";
        for (std::size_t i = 0; i < ids.size(); ++i) {
          os << ids[i] << "\t" << (rc.ratios[i] ? fixed6(*rc.ratios[i]) : "n/a") << "\t"
             << (rb.ratios[i] ? fixed6(*rb.ratios[i]) : "n/a") << "\n";
        }
      }
      return kExitOk;
    };
  });
}

void print_problems(const ValidationError& e) {
  std::cerr << "error: input validation failed\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circlenet: circle representation tools for detection experiments"};
  app.require_subcommand(1);
  std::function<int()> run;
  add_ciou(app, run);
  add_eval(app, run);
  add_generate(app, run);
  add_perturb(app, run);
  add_encode(app, run);
  add_decode(app, run);
  add_fit(app, run);
  add_rotcheck(app, run);
  add_displace(app, run);
  add_froc(app, run);
  add_mdt(app, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    return run ? run() : kExitInternal;
  } catch (const ValidationError& e) {
    print_problems(e);
    return kExitInput;
  } catch (const EncodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
