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
#include <stdexcept>
#include <string>
#include <vector>

#include "circlenet/geometry.hpp"
#include "circlenet/grid.hpp"

namespace circlenet {

/// How the Gaussian kernel width is chosen for each object.
struct SigmaPolicy {
  enum class Kind { kFixed, kSizeAdaptive };

  Kind kind = Kind::kSizeAdaptive;
  double value = 0.7;  // sigma for kFixed, min_overlap for kSizeAdaptive

  static SigmaPolicy fixed(double sigma) { return {Kind::kFixed, sigma}; }
  static SigmaPolicy size_adaptive(double min_overlap) { return {Kind::kSizeAdaptive, min_overlap}; }
};

struct EncoderConfig {
  int input_w = 512;
  int input_h = 512;
  int stride = 4;
  int num_classes = 1;
  SigmaPolicy sigma = SigmaPolicy::size_adaptive(0.7);

  int output_w() const { return input_w / stride; }
  int output_h() const { return input_h / stride; }

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct Keypoint {
  int category = 0;
  int cell_x = 0;
  int cell_y = 0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double radius = 0.0;  // output-stride units
};

/// Training targets at output resolution.
struct HeatmapTargets {
  int stride = 4;
  Grid heatmap;     // num_classes x H/R x W/R
  Grid radius_map;  // 1 x H/R x W/R
  Grid offset_map;  // 2 x H/R x W/R (channel 0: x, channel 1: y)
  std::vector<Keypoint> keypoints;

  /// Circles reconstructed from the keypoint list in input coordinates.
  std::vector<Circle> circles() const;
};

struct ObjectError {
  std::size_t index = 0;
  std::string reason;
};

/// Raised when some ground-truth objects cannot be encoded. Lists every
/// offending object, not just the first.
class EncodeError : public std::invalid_argument {
 public:
  explicit EncodeError(std::vector<ObjectError> errors);
  const std::vector<ObjectError>& errors() const { return errors_; }

 private:
  std::vector<ObjectError> errors_;
};

/// Kernel standard deviation for an object of radius `radius_out` (output
/// stride units). The size-adaptive policy bisects for the largest centre
/// shift that keeps ciou >= min_overlap and returns a third of it.
double gaussian_sigma(double radius_out, const SigmaPolicy& policy);

/// Largest centre shift s (in units of the radius' scale) such that a circle
/// shifted by s keeps ciou >= min_overlap with the original.
double max_tolerated_shift(double radius, double min_overlap);

/// Splats each circle into the per-class heatmap (element-wise maximum for
/// overlapping kernels) and writes radius and offset targets at the
/// keypoint cell floor(center / R). When two objects land on the same cell
/// the larger radius wins the radius/offset slot.
HeatmapTargets encode(std::span<const Circle> gt, const EncoderConfig& cfg);

}  // namespace circlenet
