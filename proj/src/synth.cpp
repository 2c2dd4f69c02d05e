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

#include "circlenet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "circlenet/random.hpp"

namespace circlenet {

void SceneConfig::validate() const {
  if (image_w < 1 || image_h < 1) throw std::invalid_argument("SceneConfig: empty image");
  if (min_objects < 1 || max_objects < min_objects) {
    throw std::invalid_argument("SceneConfig: need 1 <= min_objects <= max_objects");
  }
  if (!(min_radius > 0.0) || max_radius < min_radius) {
    throw std::invalid_argument("SceneConfig: need 0 < min_radius <= max_radius");
  }
  if (2.0 * min_radius > std::min(image_w, image_h)) {
    throw std::invalid_argument("SceneConfig: min_radius does not fit inside the image");
  }
  if (!(max_pairwise_ciou >= 0.0 && max_pairwise_ciou <= 1.0)) {
    throw std::invalid_argument("SceneConfig: max_pairwise_ciou must be in [0, 1]");
  }
  if (classes < 1) throw std::invalid_argument("SceneConfig: classes must be >= 1");
}

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Scene scene;
  scene.image_w = cfg.image_w;
  scene.image_h = cfg.image_h;
  const auto count = rng.uniform_int(cfg.min_objects, cfg.max_objects);
  const double r_cap = 0.5 * std::min(cfg.image_w, cfg.image_h);
  const double r_hi = std::min(cfg.max_radius, r_cap);

  for (std::int64_t k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Circle c;
      c.radius = rng.uniform(cfg.min_radius, r_hi);
      c.center = {rng.uniform(c.radius, cfg.image_w - c.radius),
                  rng.uniform(c.radius, cfg.image_h - c.radius)};
      c.category = static_cast<int>(rng.uniform_int(0, cfg.classes - 1));
      c.score = 1.0;
      const bool ok = std::all_of(scene.circles.begin(), scene.circles.end(), [&](const Circle& o) {
        return ciou(o, c) <= cfg.max_pairwise_ciou;
      });
      if (ok) {
        scene.circles.push_back(c);
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error("generate_scene: could not place object " + std::to_string(k + 1) +
                               " of " + std::to_string(count) + " within " +
                               std::to_string(kPlacementAttempts) +
                               " attempts under max_pairwise_ciou=" +
                               std::to_string(cfg.max_pairwise_ciou) +
                               "; lower max_objects or the radius range, or enlarge the image");
    }
  }
  scene.masks.reserve(scene.circles.size());
  for (const Circle& c : scene.circles) scene.masks.push_back(inscribed_polygon(c, kMaskSides));
  return scene;
}

void PerturbConfig::validate() const {
  for (double r : {drop_rate, spurious_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("PerturbConfig: rates must be in [0, 1]");
  }
  if (!(center_sigma >= 0.0) || !(radius_jitter >= 0.0) || !(score_noise >= 0.0)) {
    throw std::invalid_argument("PerturbConfig: noise levels must be >= 0");
  }
  if (!(spurious_score_max >= 0.0 && spurious_score_max <= 1.0)) {
    throw std::invalid_argument("PerturbConfig: spurious_score_max must be in [0, 1]");
  }
  if (!(image_w > 0.0) || !(image_h > 0.0)) throw std::invalid_argument("PerturbConfig: empty image");
}

std::vector<Circle> perturb_detections(const std::vector<Circle>& gt, const PerturbConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<Circle> out;
  out.reserve(gt.size());
  double r_min = gt.empty() ? 1.0 : gt.front().radius;
  double r_max = r_min;
  for (const Circle& g : gt) {
    r_min = std::min(r_min, g.radius);
    r_max = std::max(r_max, g.radius);
    // Fixed draw count per object keeps streams aligned across settings.
    const bool dropped = rng.bernoulli(cfg.drop_rate);
    const double jx = rng.normal();
    const double jy = rng.normal();
    const double jr = rng.normal();
    const double js = rng.normal();
    if (dropped) continue;
    Circle p = g;
    p.center = {g.center.x + cfg.center_sigma * jx, g.center.y + cfg.center_sigma * jy};
    p.radius = std::max(0.0, g.radius * (1.0 + cfg.radius_jitter * jr));
    p.score = std::clamp(1.0 - std::abs(cfg.score_noise * js), 0.0, 1.0);
    out.push_back(p);
  }
  for (const Circle& g : gt) {
    const bool spawn = rng.bernoulli(cfg.spurious_rate);
    const double x = rng.uniform(0.0, cfg.image_w);
    const double y = rng.uniform(0.0, cfg.image_h);
    const double r = rng.uniform(r_min, r_max);
    const double s = rng.uniform(0.0, cfg.spurious_score_max);
    if (!spawn) continue;
    Circle p;
    p.center = {x, y};
    p.radius = r;
    p.score = s;
    p.category = g.category;
    out.push_back(p);
  }
  return out;
}

}  // namespace circlenet
