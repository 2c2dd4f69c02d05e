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

#include <span>

#include "circlenet/encode.hpp"
#include "circlenet/grid.hpp"

namespace circlenet {

/// Probabilities are kept this far away from 0 and 1 before taking logs.
inline constexpr double kProbClamp = 1e-7;

/// Raw network-style outputs at output resolution.
struct OutputMaps {
  Grid heatmap_logits;  // C x h x w
  Grid radius;          // 1 x h x w
  Grid offset;          // 2 x h x w

  OutputMaps() = default;
  OutputMaps(int classes, int height, int width)
      : heatmap_logits(classes, height, width),
        radius(1, height, width),
        offset(2, height, width) {}

  bool same_shape(const OutputMaps& o) const {
    return heatmap_logits.same_shape(o.heatmap_logits) && radius.same_shape(o.radius) &&
           offset.same_shape(o.offset);
  }
};

struct LossWeights {
  double lambda_radius = 0.1;
  double lambda_off = 1.0;
  double alpha = 2.0;
  double beta = 4.0;
};

struct LossTerm {
  double value = 0.0;
  Grid grad;
};

struct LossReport {
  double focal = 0.0;   // L_k
  double offset = 0.0;  // L_off
  double radius = 0.0;  // L_radius
  double total = 0.0;   // L_det
  OutputMaps grad;
};

/// Logistic squashing clamped to [kProbClamp, 1 - kProbClamp].
double squash(double logit);

/// Inverse of squash on the clamped range.
double unsquash(double prob);

/// Applies squash to every cell.
Grid squash(const Grid& logits);

/// Penalty-reduced pixel-wise focal loss on squash(logits) against the
/// target heatmap. Gradient is with respect to the logits; it is zero where
/// the clamp is active. Throws std::invalid_argument when no cell has Y = 1.
LossTerm focal_loss(const Grid& logits, const Grid& target, double alpha, double beta);

/// Mean absolute radius error at the keypoint cells.
LossTerm radius_loss(const Grid& radius_pred, std::span<const Keypoint> keypoints);

/// Mean over keypoints of the L1 offset error, summed over both axes.
LossTerm offset_loss(const Grid& offset_pred, std::span<const Keypoint> keypoints);

LossReport total_loss(const OutputMaps& maps, const HeatmapTargets& targets,
                      const LossWeights& w = {});

/// Maps whose squashed heatmap reproduces the (clamped) target heatmap and
/// whose radius/offset maps equal the targets. Decoding them recovers the
/// ground truth.
OutputMaps perfect_maps(const HeatmapTargets& targets);

/// Loss minimiser: saturated logits (positive at Y = 1 cells, negative
/// elsewhere) with exact radius and offset targets. Every gradient is zero.
OutputMaps optimal_maps(const HeatmapTargets& targets);

}  // namespace circlenet
