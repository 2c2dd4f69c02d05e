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

#include "circlenet/reftrainer.hpp"

#include <cmath>

#include "circlenet/random.hpp"

namespace circlenet {
namespace {

LossSnapshot snapshot(int step, const LossReport& r) {
  return {step, r.focal, r.offset, r.radius, r.total};
}

Grid step_from(const Grid& g, const Grid& grad, double lr) {
  Grid next = g;
  auto d = next.values();
  auto s = grad.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= lr * s[i];
  return next;
}

// Gradient step on one block of map entries, halving the step while the
// block's own (weighted) term would rise. The blocks are the heatmap
// logits, the radius map and the offset map; L_det is separable across
// them, so a non-increasing term per block keeps L_det non-increasing.
// The block is left unchanged when no step size is accepted.
template <class TermFn>
void block_step(Grid& block, const Grid& grad, double current, const FitConfig& cfg, TermFn&& term) {
  double lr = cfg.learning_rate;
  Grid cand = step_from(block, grad, lr);
  if (cfg.max_backtracks == 0) {
    block = std::move(cand);
    return;
  }
  double value = term(cand);
  for (int b = 0; b < cfg.max_backtracks && value > current; ++b) {
    lr *= 0.5;
    cand = step_from(block, grad, lr);
    value = term(cand);
  }
  if (value <= current) block = std::move(cand);
}

}  // namespace

FitDivergence::FitDivergence(int step, double loss, double initial)
    : std::runtime_error("fit_maps: diverged at step " + std::to_string(step) + " (L_det=" +
                         std::to_string(loss) + ", initial " + std::to_string(initial) + ")"),
      step_(step) {}

void FitConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("FitConfig: steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("FitConfig: learning_rate must be > 0");
  }
  if (record_every < 1) throw std::invalid_argument("FitConfig: record_every must be >= 1");
  if (init == Init::kNoise && !(noise_sigma >= 0.0)) {
    throw std::invalid_argument("FitConfig: noise_sigma must be >= 0");
  }
  if (max_backtracks < 0) throw std::invalid_argument("FitConfig: max_backtracks must be >= 0");
}

OutputMaps initial_maps(const HeatmapTargets& targets, const FitConfig& cfg) {
  OutputMaps m(targets.heatmap.channels(), targets.heatmap.height(), targets.heatmap.width());
  if (cfg.init == FitConfig::Init::kNoise) {
    Rng rng(cfg.seed);
    for (Grid* g : {&m.heatmap_logits, &m.radius, &m.offset}) {
      for (double& v : g->values()) v = rng.normal(0.0, cfg.noise_sigma);
    }
  }
  return m;
}

FitResult fit_maps(const HeatmapTargets& targets, const FitConfig& cfg) {
  return fit_maps(targets, initial_maps(targets, cfg), cfg);
}

FitResult fit_maps(const HeatmapTargets& targets, OutputMaps start, const FitConfig& cfg) {
  cfg.validate();
  if (targets.keypoints.empty()) throw std::invalid_argument("fit_maps: no keypoints");

  FitResult out;
  out.maps = std::move(start);
  LossReport cur = total_loss(out.maps, targets, cfg.weights);
  const double initial = cur.total;
  out.trajectory.push_back(snapshot(0, cur));

  const LossWeights& w = cfg.weights;
  for (int step = 1; step <= cfg.steps; ++step) {
    block_step(out.maps.heatmap_logits, cur.grad.heatmap_logits, cur.focal, cfg, [&](const Grid& g) {
      return focal_loss(g, targets.heatmap, w.alpha, w.beta).value;
    });
    block_step(out.maps.radius, cur.grad.radius, w.lambda_radius * cur.radius, cfg, [&](const Grid& g) {
      return w.lambda_radius * radius_loss(g, targets.keypoints).value;
    });
    block_step(out.maps.offset, cur.grad.offset, w.lambda_off * cur.offset, cfg, [&](const Grid& g) {
      return w.lambda_off * offset_loss(g, targets.keypoints).value;
    });
    cur = total_loss(out.maps, targets, w);
    if (cur.total > 10.0 * initial) throw FitDivergence(step, cur.total, initial);
    if (step % cfg.record_every == 0 || step == cfg.steps) {
      out.trajectory.push_back(snapshot(step, cur));
    }
  }
  return out;
}

bool is_non_increasing(const std::vector<LossSnapshot>& trajectory, int skip, double tol) {
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (trajectory[i].step <= skip) continue;
    if (trajectory[i].total > trajectory[i - 1].total + tol) return false;
  }
  return true;
}

EndToEndResult end_to_end_check(const SceneConfig& scene_cfg, const FitConfig& fit_cfg,
                                const MatchConfig& eval_cfg, const EncoderConfig& enc_cfg,
                                const DecodeConfig& dec_cfg) {
  EndToEndResult r;
  r.scene = generate_scene(scene_cfg);
  const HeatmapTargets targets = encode(r.scene.circles, enc_cfg);
  r.fit = fit_maps(targets, fit_cfg);
  r.detections = decode_circles(r.fit.maps, dec_cfg);
  ImageRecords im;
  im.image_id = 0;
  im.width = r.scene.image_w;
  im.height = r.scene.image_h;
  im.gts = r.scene.circles;
  im.preds = r.detections;
  r.report = evaluate(std::span<const ImageRecords>(&im, 1), eval_cfg);
  return r;
}

EvalReport end_to_end_check(const SceneConfig& scene_cfg, const FitConfig& fit_cfg,
                            const MatchConfig& eval_cfg) {
  EncoderConfig enc;
  enc.input_w = scene_cfg.image_w;
  enc.input_h = scene_cfg.image_h;
  enc.num_classes = scene_cfg.classes;
  DecodeConfig dec;
  dec.stride = enc.stride;
  return end_to_end_check(scene_cfg, fit_cfg, eval_cfg, enc, dec).report;
}

}  // namespace circlenet
