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

#include "circlenet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace circlenet {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_cells(const Grid& g, std::span<const Keypoint> keypoints, const char* what) {
  if (keypoints.empty()) {
    throw std::invalid_argument(std::string(what) + ": keypoint list is empty");
  }
  for (const auto& k : keypoints) {
    if (!g.contains(k.cell_y, k.cell_x)) {
      throw std::invalid_argument(std::string(what) + ": keypoint cell outside the map");
    }
  }
}

}  // namespace

double squash(double logit) { return std::clamp(sigmoid(logit), kProbClamp, 1.0 - kProbClamp); }

double unsquash(double prob) {
  const double p = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  return std::log(p) - std::log1p(-p);
}

Grid squash(const Grid& logits) {
  Grid out = logits;
  for (double& v : out.values()) v = squash(v);
  return out;
}

LossTerm focal_loss(const Grid& logits, const Grid& target, double alpha, double beta) {
  if (!logits.same_shape(target)) throw std::invalid_argument("focal_loss: shape mismatch");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("focal_loss: alpha and beta must be >= 0");
  }
  const auto z = logits.values();
  const auto y = target.values();
  const auto positives = std::count(y.begin(), y.end(), 1.0);
  if (positives == 0) throw std::invalid_argument("focal_loss: no positive cell (N = 0)");
  const double inv_n = 1.0 / static_cast<double>(positives);

  LossTerm out;
  out.grad = Grid(logits.channels(), logits.height(), logits.width());
  auto g = out.grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double raw = sigmoid(z[i]);
    const bool clamped = raw <= kProbClamp || raw >= 1.0 - kProbClamp;
    const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
    double term = 0.0;
    double dterm = 0.0;  // d term / d logit
    if (y[i] == 1.0) {
      const double m = std::pow(1.0 - p, alpha);
      term = m * std::log(p);
      dterm = m * ((1.0 - p) - alpha * p * std::log(p));
    } else {
      const double w = std::pow(1.0 - y[i], beta);
      const double pa = std::pow(p, alpha);
      const double l1p = std::log1p(-p);
      term = w * pa * l1p;
      dterm = w * (alpha * pa * (1.0 - p) * l1p - pa * p);
    }
    sum += term;
    g[i] = clamped ? 0.0 : -inv_n * dterm;
  }
  out.value = -inv_n * sum;
  return out;
}

LossTerm radius_loss(const Grid& radius_pred, std::span<const Keypoint> keypoints) {
  require_cells(radius_pred, keypoints, "radius_loss");
  const double inv_n = 1.0 / static_cast<double>(keypoints.size());
  LossTerm out;
  out.grad = Grid(radius_pred.channels(), radius_pred.height(), radius_pred.width());
  double sum = 0.0;
  for (const auto& k : keypoints) {
    const double res = radius_pred.at(0, k.cell_y, k.cell_x) - k.radius;
    sum += std::abs(res);
    out.grad.at(0, k.cell_y, k.cell_x) += inv_n * sign(res);
  }
  out.value = inv_n * sum;
  return out;
}

LossTerm offset_loss(const Grid& offset_pred, std::span<const Keypoint> keypoints) {
  require_cells(offset_pred, keypoints, "offset_loss");
  if (offset_pred.channels() != 2) throw std::invalid_argument("offset_loss: need 2 channels");
  const double inv_n = 1.0 / static_cast<double>(keypoints.size());
  LossTerm out;
  out.grad = Grid(2, offset_pred.height(), offset_pred.width());
  double sum = 0.0;
  for (const auto& k : keypoints) {
    const double rx = offset_pred.at(0, k.cell_y, k.cell_x) - k.offset_x;
    const double ry = offset_pred.at(1, k.cell_y, k.cell_x) - k.offset_y;
    sum += std::abs(rx) + std::abs(ry);
    out.grad.at(0, k.cell_y, k.cell_x) += inv_n * sign(rx);
    out.grad.at(1, k.cell_y, k.cell_x) += inv_n * sign(ry);
  }
  out.value = inv_n * sum;
  return out;
}

LossReport total_loss(const OutputMaps& maps, const HeatmapTargets& targets,
                      const LossWeights& w) {
  if (!maps.heatmap_logits.same_shape(targets.heatmap) ||
      !maps.radius.same_shape(targets.radius_map) || !maps.offset.same_shape(targets.offset_map)) {
    throw std::invalid_argument("total_loss: output maps do not match the target shapes");
  }
  for (double v : {w.lambda_radius, w.lambda_off, w.alpha, w.beta}) {
    if (!std::isfinite(v)) throw std::invalid_argument("total_loss: non-finite weight");
  }

  LossTerm focal = focal_loss(maps.heatmap_logits, targets.heatmap, w.alpha, w.beta);
  LossTerm radius = radius_loss(maps.radius, targets.keypoints);
  LossTerm offset = offset_loss(maps.offset, targets.keypoints);

  LossReport r;
  r.focal = focal.value;
  r.radius = radius.value;
  r.offset = offset.value;
  r.total = r.focal + w.lambda_radius * r.radius + w.lambda_off * r.offset;
  r.grad.heatmap_logits = std::move(focal.grad);
  r.grad.radius = std::move(radius.grad);
  for (double& v : r.grad.radius.values()) v *= w.lambda_radius;
  r.grad.offset = std::move(offset.grad);
  for (double& v : r.grad.offset.values()) v *= w.lambda_off;
  return r;
}

OutputMaps perfect_maps(const HeatmapTargets& targets) {
  OutputMaps m;
  m.heatmap_logits = targets.heatmap;
  for (double& v : m.heatmap_logits.values()) v = unsquash(v);
  m.radius = targets.radius_map;
  m.offset = targets.offset_map;
  return m;
}

OutputMaps optimal_maps(const HeatmapTargets& targets) {
  // Beyond the clamp in either direction, so the focal gradient vanishes.
  constexpr double kSaturated = 30.0;
  OutputMaps m;
  m.heatmap_logits = targets.heatmap;
  for (double& v : m.heatmap_logits.values()) v = v == 1.0 ? kSaturated : -kSaturated;
  m.radius = targets.radius_map;
  m.offset = targets.offset_map;
  return m;
}

}  // namespace circlenet
