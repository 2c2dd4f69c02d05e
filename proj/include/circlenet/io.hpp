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

// Line-delimited JSON interchange files. Every floating value is written
// with exactly six decimals so write -> read -> write is byte-identical.
//
// Dataset file:
//   {"format":"circlenet-dataset","version":1}
//   {"type":"image","id":1,"width":512,"height":512}
//   {"type":"annotation","id":1,"image_id":1,"category_id":0,
//    "circle_center":[x,y],"circle_radius":r,"bbox":[x,y,w,h],
//    "segmentation":[[x0,y0,x1,y1,...]],"area":a}
// `bbox` and `segmentation` are optional; `area` is pi r^2.
//
// Prediction file, one record per line:
//   {"image_id":1,"category_id":0,"circle_center":[x,y],"circle_radius":r,"score":s}
//
// Maps file, one block per image:
//   {"type":"maps","kind":"targets"|"outputs","image_id":1,"stride":4,
//    "classes":C,"width":w,"height":h}
//   {"type":"grid","name":"heatmap"|"heatmap_logits"|"radius"|"offset",
//    "shape":[channels,height,width],"data":[...]}
//   {"type":"keypoint","category_id":c,"cell":[x,y],"offset":[dx,dy],"radius":r}
// Targets carry heatmap/radius/offset grids plus keypoints; outputs carry
// heatmap_logits/radius/offset grids.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circlenet/encode.hpp"
#include "circlenet/eval.hpp"
#include "circlenet/geometry.hpp"
#include "circlenet/losses.hpp"
#include "circlenet/synth.hpp"

namespace circlenet {

inline constexpr int kDatasetFormatVersion = 1;

/// Input that fails schema or cross-file checks. Each message names the
/// offending record (1-based line number).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ImageInfo {
  std::int64_t id = 0;
  int width = 0;
  int height = 0;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  Circle circle;  // category mirrors category_id
  std::optional<Box> bbox;
  std::optional<PolygonMask> mask;
  double area = 0.0;
};

struct Dataset {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;

  const ImageInfo* find_image(std::int64_t id) const;
};

struct Prediction {
  std::int64_t image_id = 0;
  Circle circle;  // score and category included
};

/// Dataset holding `scenes` as images 1..n; annotations are numbered from 1
/// in scene order and carry the tight box, the polygon mask and pi r^2.
Dataset dataset_from_scenes(std::span<const Scene> scenes);

/// "%.6f" formatting used for every floating value in the files.
std::string fixed6(double v);

void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);

void write_predictions(std::ostream& os, const std::vector<Prediction>& preds);
std::vector<Prediction> read_predictions(std::istream& is);

/// Checks that every prediction references a rostered image.
void cross_validate(const Dataset& gt, const std::vector<Prediction>& preds);

/// Groups ground truth and predictions per rostered image (roster order).
std::vector<ImageRecords> group_by_image(const Dataset& gt, const std::vector<Prediction>& preds);

struct TargetsBlock {
  std::int64_t image_id = 0;
  HeatmapTargets targets;
};

struct OutputsBlock {
  std::int64_t image_id = 0;
  int stride = 4;
  OutputMaps maps;
};

void write_targets(std::ostream& os, const std::vector<TargetsBlock>& blocks);
std::vector<TargetsBlock> read_targets(std::istream& is);

void write_outputs(std::ostream& os, const std::vector<OutputsBlock>& blocks);
std::vector<OutputsBlock> read_outputs(std::istream& is);

}  // namespace circlenet
