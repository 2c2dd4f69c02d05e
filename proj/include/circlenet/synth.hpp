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

#pragma once

#include <cstdint>
#include <vector>

#include "circlenet/geometry.hpp"

namespace circlenet {

inline constexpr int kMaskSides = 64;
inline constexpr int kPlacementAttempts = 10000;

struct SceneConfig {
  int image_w = 512;
  int image_h = 512;
  int min_objects = 1;
  int max_objects = 8;
  double min_radius = 8.0;
  double max_radius = 40.0;
  double max_pairwise_ciou = 0.0;  // 0 keeps every pair disjoint
  int classes = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  int image_w = 0;
  int image_h = 0;
  std::vector<Circle> circles;
  std::vector<PolygonMask> masks;  // regular 64-gon inscribed in each circle
};

/// Rejection-samples circles fully inside the image with pairwise ciou at
/// most cfg.max_pairwise_ciou. Throws std::runtime_error naming the
/// constraint when an object cannot be placed within kPlacementAttempts.
Scene generate_scene(const SceneConfig& cfg);

struct PerturbConfig {
  double center_sigma = 0.0;     // pixels
  double radius_jitter = 0.0;    // fraction of the radius (normal sigma)
  double drop_rate = 0.0;        // chance a true object is missed
  double spurious_rate = 0.0;    // chance per object of one extra false detection
  double score_noise = 0.0;      // true scores are 1 - |N(0, score_noise)|
  double spurious_score_max = 0.5;  // spurious scores are U(0, this)
  double image_w = 512.0;
  double image_h = 512.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Simulated detector output for a ground-truth set. True detections are
/// emitted in ground-truth order followed by spurious ones.
std::vector<Circle> perturb_detections(const std::vector<Circle>& gt, const PerturbConfig& cfg);

}  // namespace circlenet
