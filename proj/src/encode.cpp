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

#include "circlenet/encode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace circlenet {
namespace {

std::string describe(const std::vector<ObjectError>& errors) {
  std::ostringstream os;
  os << "encode: " << errors.size() << " object(s) rejected:";
  for (const auto& e : errors) os << " [" << e.index << "] " << e.reason << ";";
  return os.str();
}

}  // namespace

EncodeError::EncodeError(std::vector<ObjectError> errors)
    : std::invalid_argument(describe(errors)), errors_(std::move(errors)) {}

void EncoderConfig::validate() const {
  if (stride < 1) throw std::invalid_argument("EncoderConfig: stride must be >= 1");
  if (input_w < stride || input_h < stride) {
    throw std::invalid_argument("EncoderConfig: image smaller than one output cell");
  }
  if (input_w % stride != 0 || input_h % stride != 0) {
    throw std::invalid_argument("EncoderConfig: input size must be divisible by the stride");
  }
  if (num_classes < 1) throw std::invalid_argument("EncoderConfig: num_classes must be >= 1");
  if (sigma.kind == SigmaPolicy::Kind::kFixed && !(sigma.value > 0.0)) {
    throw std::invalid_argument("EncoderConfig: fixed sigma must be > 0");
  }
  if (sigma.kind == SigmaPolicy::Kind::kSizeAdaptive &&
      !(sigma.value > 0.0 && sigma.value < 1.0)) {
    throw std::invalid_argument("EncoderConfig: min_overlap must be in (0, 1)");
  }
}

std::vector<Circle> HeatmapTargets::circles() const {
  std::vector<Circle> out;
  out.reserve(keypoints.size());
  for (const auto& k : keypoints) {
    Circle c;
    c.center = {(k.cell_x + k.offset_x) * stride, (k.cell_y + k.offset_y) * stride};
    c.radius = k.radius * stride;
    c.category = k.category;
    out.push_back(c);
  }
  return out;
}

double max_tolerated_shift(double radius, double min_overlap) {
  if (!(radius > 0.0)) throw std::invalid_argument("max_tolerated_shift: radius must be > 0");
  if (!(min_overlap > 0.0 && min_overlap < 1.0)) {
    throw std::invalid_argument("max_tolerated_shift: min_overlap must be in (0, 1)");
  }
  const Circle base{{0.0, 0.0}, radius};
  auto overlap_at = [&](double s) { return ciou(base, Circle{{s, 0.0}, radius}); };
  // ciou is 1 at s = 0 and 0 at s = 2r, strictly decreasing in between.
  double lo = 0.0;
  double hi = 2.0 * radius;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * radius; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (overlap_at(mid) >= min_overlap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double gaussian_sigma(double radius_out, const SigmaPolicy& policy) {
  if (!(radius_out > 0.0) || !std::isfinite(radius_out)) {
    throw std::invalid_argument("gaussian_sigma: radius must be a positive finite value");
  }
  switch (policy.kind) {
    case SigmaPolicy::Kind::kFixed:
      if (!(policy.value > 0.0)) throw std::invalid_argument("gaussian_sigma: sigma must be > 0");
      return policy.value;
    case SigmaPolicy::Kind::kSizeAdaptive:
      return max_tolerated_shift(radius_out, policy.value) / 3.0;
  }
  throw std::invalid_argument("gaussian_sigma: unknown policy");
}

HeatmapTargets encode(std::span<const Circle> gt, const EncoderConfig& cfg) {
  cfg.validate();
  const double R = cfg.stride;
  const int ow = cfg.output_w();
  const int oh = cfg.output_h();

  std::vector<ObjectError> errors;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Circle& c = gt[i];
    if (!std::isfinite(c.center.x) || !std::isfinite(c.center.y) || !std::isfinite(c.radius)) {
      errors.push_back({i, "non-finite geometry"});
      continue;
    }
    if (!(c.center.x >= 0.0 && c.center.x < cfg.input_w && c.center.y >= 0.0 &&
          c.center.y < cfg.input_h)) {
      errors.push_back({i, "center outside image"});
    }
    if (!(c.radius > 0.0)) errors.push_back({i, "radius must be > 0"});
    if (c.category < 0 || c.category >= cfg.num_classes) {
      errors.push_back({i, "category out of range"});
    }
  }
  if (!errors.empty()) throw EncodeError(std::move(errors));

  HeatmapTargets t;
  t.stride = cfg.stride;
  t.heatmap = Grid(cfg.num_classes, oh, ow, 0.0);
  t.radius_map = Grid(1, oh, ow, 0.0);
  t.offset_map = Grid(2, oh, ow, 0.0);
  t.keypoints.reserve(gt.size());

  for (const Circle& c : gt) {
    const double sx = c.center.x / R;
    const double sy = c.center.y / R;
    Keypoint k;
    k.category = c.category;
    k.cell_x = std::min(static_cast<int>(std::floor(sx)), ow - 1);
    k.cell_y = std::min(static_cast<int>(std::floor(sy)), oh - 1);
    k.offset_x = sx - k.cell_x;
    k.offset_y = sy - k.cell_y;
    k.radius = c.radius / R;
    t.keypoints.push_back(k);

    const double sigma = gaussian_sigma(k.radius, cfg.sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int y = 0; y < oh; ++y) {
      const double dy = y - k.cell_y;
      for (int x = 0; x < ow; ++x) {
        const double dx = x - k.cell_x;
        double& v = t.heatmap.at(k.category, y, x);
        v = std::max(v, std::exp(-(dx * dx + dy * dy) * inv));
      }
    }
  }

  // Radius and offset slots: larger radius wins a shared cell, so the
  // result does not depend on input order.
  Grid owner(1, oh, ow, -1.0);
  for (const Keypoint& k : t.keypoints) {
    double& best = owner.at(0, k.cell_y, k.cell_x);
    const bool take = k.radius > best ||
                      (k.radius == best && (k.offset_x < t.offset_map.at(0, k.cell_y, k.cell_x) ||
                                            (k.offset_x == t.offset_map.at(0, k.cell_y, k.cell_x) &&
                                             k.offset_y < t.offset_map.at(1, k.cell_y, k.cell_x))));
    if (!take) continue;
    best = k.radius;
    t.radius_map.at(0, k.cell_y, k.cell_x) = k.radius;
    t.offset_map.at(0, k.cell_y, k.cell_x) = k.offset_x;
    t.offset_map.at(1, k.cell_y, k.cell_x) = k.offset_y;
  }
  return t;
}

}  // namespace circlenet
