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

#include <vector>

#include "circlenet/encode.hpp"
#include "circlenet/geometry.hpp"
#include "circlenet/grid.hpp"
#include "circlenet/losses.hpp"

namespace circlenet {

struct DecodeConfig {
  int top_n = 100;
  double score_threshold = 0.0;
  int stride = 4;
  bool apply_nms = false;
  double nms_threshold = 0.5;

  void validate() const;
};

struct Peak {
  int x = 0;
  int y = 0;
  int category = 0;
  double score = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

/// Cells whose value is >= every in-bounds 8-neighbour of the same class.
/// Sorted by score descending, ties by (class, y, x) ascending; peaks below
/// the score threshold are dropped and the rest truncated to top_n.
std::vector<Peak> extract_peaks(const Grid& heatmap, const DecodeConfig& cfg);

/// Peaks of the squashed heatmap turned into circles at input resolution.
std::vector<Circle> decode_circles(const OutputMaps& maps, const DecodeConfig& cfg);

/// Rotates output maps by quarter turns so that decoding the result equals
/// rotating the decoded circles. Cell (x, y) of a w x h grid moves to
/// (y, w - 1 - x) and the offset (dx, dy) becomes (dy, 1 - dx) per turn.
OutputMaps rotate_maps(const OutputMaps& maps, int turns);

}  // namespace circlenet
