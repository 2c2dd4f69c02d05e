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

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "circlenet/encode.hpp"
#include "circlenet/geometry.hpp"

namespace circlenet {

enum class OverlapMetric { kCiou, kBoxIou };

/// ciou for kCiou; box_iou of the tight boxes for kBoxIou.
double overlap(const Circle& a, const Circle& b, OverlapMetric metric);

/// Area used for size buckets: pi r^2, or (2r)^2 under the box metric.
double bucket_area(const Circle& c, OverlapMetric metric);

struct AreaRange {
  std::string name;
  double min = 0.0;  // inclusive
  double max = std::numeric_limits<double>::infinity();  // exclusive

  bool contains(double area) const { return area >= min && area < max; }
};

/// 0.50, 0.55, ..., 0.95 (each k / 100 exactly).
std::vector<double> coco_thresholds();

struct MatchConfig {
  OverlapMetric metric = OverlapMetric::kCiou;
  std::vector<double> thresholds = coco_thresholds();
  std::vector<AreaRange> area_ranges = {
      {"all", 0.0, std::numeric_limits<double>::infinity()},
      {"small", 0.0, 32.0 * 32.0},
      {"medium", 32.0 * 32.0, 96.0 * 96.0},
  };

  void validate() const;
};

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> true_positives;  // (pred, gt)
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;
};

/// Greedy matching of one image and one class. Predictions are visited by
/// descending score (ties by centre y, then x); each takes the unmatched
/// ground truth with the highest overlap when that overlap >= threshold.
Matching match_detections(std::span<const Circle> preds, std::span<const Circle> gts,
                          OverlapMetric metric, double threshold);

struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
};

inline constexpr std::size_t kRecallPoints = 101;

struct PrCurve {
  double ap = 0.0;
  std::array<double, kRecallPoints> precision{};  // at recall k / 100
};

/// 101-point interpolated AP. `outcomes` must already be in ranking order.
/// Throws std::invalid_argument when num_gt == 0.
PrCurve average_precision(std::span<const ScoredOutcome> outcomes, std::size_t num_gt);

/// Ground truth and predictions of one image.
struct ImageRecords {
  std::int64_t image_id = 0;
  double width = 0.0;
  double height = 0.0;
  std::vector<Circle> gts;
  std::vector<Circle> preds;
};

struct FrocPoint {
  double score = 0.0;  // operating point: predictions with score >= this
  double fp_per_image = 0.0;
  double sensitivity = 0.0;
};

struct ThresholdCounts {
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  std::optional<double> ap_small;   // empty when no ground truth is small
  std::optional<double> ap_medium;  // empty when no ground truth is medium
  std::vector<double> thresholds;
  std::vector<double> per_threshold_ap;
  std::vector<std::array<double, kRecallPoints>> pr_curves;  // class-averaged
  std::vector<FrocPoint> froc;                               // at thresholds.front()
  std::vector<ThresholdCounts> counts;
};

/// COCO-style AP family. Ground truths outside an area range are ignored for
/// that range, as are predictions matched to them and unmatched predictions
/// outside the range. AP is the mean over classes that have ground truth.
EvalReport evaluate(std::span<const ImageRecords> images, const MatchConfig& cfg = {});

/// Mean AP over cfg.thresholds for a single area range, or empty when the
/// range holds no ground truth.
std::optional<double> mean_ap_in_range(std::span<const ImageRecords> images,
                                       const MatchConfig& cfg, const AreaRange& range);

/// Sensitivity against mean false positives per image at every distinct
/// prediction score, sorted by false positives per image.
std::vector<FrocPoint> froc(std::span<const ImageRecords> images, OverlapMetric metric,
                            double match_threshold);

/// Greedy one-to-one pairing by descending overlap; pairs above 0.5 count.
/// Returns matched / ((|a| + |b|) / 2), and 1 when both sets are empty.
double rotation_consistency(std::span<const Circle> a, std::span<const Circle> b,
                            OverlapMetric metric = OverlapMetric::kCiou);
double rotation_consistency(std::span<const Box> a, std::span<const Box> b);

struct MdtReport {
  std::vector<std::optional<double>> ratios;  // empty entry: zero detection area
  double mean = 0.0;
  std::size_t skipped = 0;
};

MdtReport mask_detection_ratio(std::span<const PolygonMask> masks, std::span<const Circle> dets);
MdtReport mask_detection_ratio(std::span<const PolygonMask> masks, std::span<const Box> dets);

enum class DisplacementMode { kIsotropic, kAxial };

struct DisplacementRow {
  double displacement = 0.0;
  double box_iou = 0.0;
  double ciou = 0.0;
};

/// Shifts the circle and its tight box by the same vector and averages both
/// overlaps per displacement magnitude. Isotropic mode draws one direction
/// per trial from the seed and reuses it for every magnitude; axial mode
/// shifts along +x.
std::vector<DisplacementRow> displacement_study(const Circle& shape,
                                                std::span<const double> displacements,
                                                int trials, std::uint64_t seed,
                                                DisplacementMode mode = DisplacementMode::kIsotropic);

/// Largest |box_iou - ciou| over the rows.
double max_metric_gap(std::span<const DisplacementRow> rows);

}  // namespace circlenet
