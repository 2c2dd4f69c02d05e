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

#include "circlenet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include "circlenet/parallel.hpp"
#include "circlenet/random.hpp"

namespace circlenet {
namespace {

// Visiting order for matching: score descending, then centre y, then x.
bool match_order(const Circle& a, const Circle& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.center.y != b.center.y) return a.center.y < b.center.y;
  return a.center.x < b.center.x;
}

std::vector<std::size_t> sorted_pred_indices(std::span<const Circle> preds) {
  std::vector<std::size_t> idx(preds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return match_order(preds[a], preds[b]); });
  return idx;
}

enum class PredStatus { kTruePositive, kFalsePositive, kIgnored };

struct GreedyResult {
  std::vector<PredStatus> status;        // indexed like the visiting order
  std::vector<std::ptrdiff_t> gt_of;     // matched gt per visited pred, -1 if none
  std::vector<bool> gt_matched;          // indexed like gts
};

// One image, one class. `ov[i][g]` is the overlap of the i-th visited
// prediction with gt g. Non-ignored ground truths are preferred: once a
// prediction holds a non-ignored match it never switches to an ignored one.
GreedyResult greedy_match(const std::vector<std::vector<double>>& ov,
                          const std::vector<bool>& gt_ignored,
                          const std::vector<bool>& pred_out_of_range, double threshold) {
  const std::size_t np = ov.size();
  const std::size_t ng = gt_ignored.size();
  std::vector<std::size_t> gt_order(ng);
  std::iota(gt_order.begin(), gt_order.end(), std::size_t{0});
  std::stable_partition(gt_order.begin(), gt_order.end(),
                        [&](std::size_t g) { return !gt_ignored[g]; });

  GreedyResult r;
  r.status.assign(np, PredStatus::kFalsePositive);
  r.gt_of.assign(np, -1);
  r.gt_matched.assign(ng, false);
  for (std::size_t i = 0; i < np; ++i) {
    std::ptrdiff_t best = -1;
    double best_ov = 0.0;
    for (std::size_t g : gt_order) {
      if (r.gt_matched[g]) continue;
      if (best >= 0 && !gt_ignored[static_cast<std::size_t>(best)] && gt_ignored[g]) break;
      const double o = ov[i][g];
      if (o < threshold) continue;
      if (best < 0 || o > best_ov) {
        best = static_cast<std::ptrdiff_t>(g);
        best_ov = o;
      }
    }
    if (best >= 0) {
      r.gt_matched[static_cast<std::size_t>(best)] = true;
      r.gt_of[i] = best;
      r.status[i] = gt_ignored[static_cast<std::size_t>(best)] ? PredStatus::kIgnored
                                                               : PredStatus::kTruePositive;
    } else {
      r.status[i] = pred_out_of_range[i] ? PredStatus::kIgnored : PredStatus::kFalsePositive;
    }
  }
  return r;
}

// Per (image, class) cache of sorted predictions and overlaps.
struct ClassCell {
  std::vector<Circle> preds;  // visiting order
  std::vector<Circle> gts;
  std::vector<std::vector<double>> ov;
};

struct ImageCells {
  std::map<int, ClassCell> by_class;
};

std::vector<ImageCells> build_cells(std::span<const ImageRecords> images,
                                    OverlapMetric metric) {
  std::vector<ImageCells> cells(images.size());
  parallel_for(images.size(), [&](std::size_t k) {
    const ImageRecords& im = images[k];
    auto& by_class = cells[k].by_class;
    for (const Circle& g : im.gts) by_class[g.category].gts.push_back(g);
    for (std::size_t i : sorted_pred_indices(im.preds)) {
      by_class[im.preds[i].category].preds.push_back(im.preds[i]);
    }
    for (auto& [cls, cell] : by_class) {
      cell.ov.assign(cell.preds.size(), std::vector<double>(cell.gts.size(), 0.0));
      for (std::size_t i = 0; i < cell.preds.size(); ++i) {
        for (std::size_t g = 0; g < cell.gts.size(); ++g) {
          cell.ov[i][g] = overlap(cell.preds[i], cell.gts[g], metric);
        }
      }
    }
  });
  return cells;
}

// Indices of images sorted by id so pooling does not depend on input order.
std::vector<std::size_t> image_order(std::span<const ImageRecords> images) {
  std::vector<std::size_t> idx(images.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return images[a].image_id < images[b].image_id;
  });
  return idx;
}

struct ClassThresholdResult {
  std::vector<ScoredOutcome> outcomes;  // ranking order, ignored removed
  std::size_t num_gt = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

ClassThresholdResult pool_class(std::span<const ImageCells> cells,
                                const std::vector<std::size_t>& order, int cls, double threshold,
                                const AreaRange& range, OverlapMetric metric) {
  ClassThresholdResult out;
  for (std::size_t k : order) {
    auto it = cells[k].by_class.find(cls);
    if (it == cells[k].by_class.end()) continue;
    const ClassCell& cell = it->second;
    std::vector<bool> gt_ignored(cell.gts.size());
    for (std::size_t g = 0; g < cell.gts.size(); ++g) {
      gt_ignored[g] = !range.contains(bucket_area(cell.gts[g], metric));
      if (!gt_ignored[g]) ++out.num_gt;
    }
    std::vector<bool> pred_out(cell.preds.size());
    for (std::size_t i = 0; i < cell.preds.size(); ++i) {
      pred_out[i] = !range.contains(bucket_area(cell.preds[i], metric));
    }
    const GreedyResult r = greedy_match(cell.ov, gt_ignored, pred_out, threshold);
    for (std::size_t i = 0; i < cell.preds.size(); ++i) {
      if (r.status[i] == PredStatus::kIgnored) continue;
      const bool tp = r.status[i] == PredStatus::kTruePositive;
      out.outcomes.push_back({cell.preds[i].score, tp});
      ++(tp ? out.tp : out.fp);
    }
    for (std::size_t g = 0; g < cell.gts.size(); ++g) {
      if (!gt_ignored[g] && !r.gt_matched[g]) ++out.fn;
    }
  }
  std::stable_sort(out.outcomes.begin(), out.outcomes.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });
  return out;
}

std::vector<int> gt_classes(std::span<const ImageRecords> images) {
  std::set<int> s;
  for (const auto& im : images) {
    for (const auto& g : im.gts) s.insert(g.category);
  }
  return {s.begin(), s.end()};
}

struct ThresholdSummary {
  std::optional<double> ap;  // empty when no class has ground truth in range
  std::array<double, kRecallPoints> precision{};
  ThresholdCounts counts;
};

ThresholdSummary summarize(std::span<const ImageCells> cells, const std::vector<std::size_t>& order,
                           const std::vector<int>& classes, double threshold,
                           const AreaRange& range, OverlapMetric metric) {
  ThresholdSummary s;
  s.counts.threshold = threshold;
  double ap_sum = 0.0;
  int counted = 0;
  for (int cls : classes) {
    const ClassThresholdResult r = pool_class(cells, order, cls, threshold, range, metric);
    s.counts.tp += r.tp;
    s.counts.fp += r.fp;
    s.counts.fn += r.fn;
    if (r.num_gt == 0) continue;
    const PrCurve pr = average_precision(r.outcomes, r.num_gt);
    ap_sum += pr.ap;
    for (std::size_t k = 0; k < kRecallPoints; ++k) s.precision[k] += pr.precision[k];
    ++counted;
  }
  if (counted > 0) {
    s.ap = ap_sum / counted;
    for (double& p : s.precision) p /= counted;
  }
  return s;
}

const AreaRange* find_range(const MatchConfig& cfg, const std::string& name) {
  for (const auto& r : cfg.area_ranges) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const AreaRange kAllAreas{"all", 0.0, std::numeric_limits<double>::infinity()};

}  // namespace

double overlap(const Circle& a, const Circle& b, OverlapMetric metric) {
  switch (metric) {
    case OverlapMetric::kCiou:
      return ciou(a, b);
    case OverlapMetric::kBoxIou:
      return box_iou(circle_to_tight_box(a), circle_to_tight_box(b));
  }
  throw std::invalid_argument("overlap: unknown metric");
}

double bucket_area(const Circle& c, OverlapMetric metric) {
  return metric == OverlapMetric::kCiou ? c.area() : circle_to_tight_box(c).area();
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

void MatchConfig::validate() const {
  if (thresholds.empty()) throw std::invalid_argument("MatchConfig: no thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw std::invalid_argument("MatchConfig: thresholds must lie in (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("MatchConfig: thresholds must be sorted ascending");
    }
  }
  for (const auto& r : area_ranges) {
    if (!(r.min <= r.max)) throw std::invalid_argument("MatchConfig: bad area range " + r.name);
  }
}

Matching match_detections(std::span<const Circle> preds, std::span<const Circle> gts,
                          OverlapMetric metric, double threshold) {
  const std::vector<std::size_t> order = sorted_pred_indices(preds);
  std::vector<std::vector<double>> ov(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t g = 0; g < gts.size(); ++g) ov[i][g] = overlap(preds[order[i]], gts[g], metric);
  }
  const GreedyResult r = greedy_match(ov, std::vector<bool>(gts.size(), false),
                                      std::vector<bool>(preds.size(), false), threshold);
  Matching m;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (r.status[i] == PredStatus::kTruePositive) {
      m.true_positives.emplace_back(order[i], static_cast<std::size_t>(r.gt_of[i]));
    } else {
      m.false_positives.push_back(order[i]);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!r.gt_matched[g]) m.false_negatives.push_back(g);
  }
  return m;
}

PrCurve average_precision(std::span<const ScoredOutcome> outcomes, std::size_t num_gt) {
  if (num_gt == 0) throw std::invalid_argument("average_precision: no ground truth");
  const std::size_t n = outcomes.size();
  std::vector<double> recall(n);
  std::vector<double> precision(n);
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (outcomes[i].true_positive ? tp : fp) += 1.0;
    recall[i] = tp / static_cast<double>(num_gt);
    precision[i] = tp / (tp + fp);
  }
  // Interpolated precision: best precision at any equal or higher recall.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  PrCurve out;
  double sum = 0.0;
  for (std::size_t k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    const double p = it == recall.end() ? 0.0 : precision[static_cast<std::size_t>(it - recall.begin())];
    out.precision[k] = p;
    sum += p;
  }
  out.ap = sum / static_cast<double>(kRecallPoints);
  return out;
}

std::optional<double> mean_ap_in_range(std::span<const ImageRecords> images,
                                       const MatchConfig& cfg, const AreaRange& range) {
  cfg.validate();
  const auto cells = build_cells(images, cfg.metric);
  const auto order = image_order(images);
  const auto classes = gt_classes(images);
  double sum = 0.0;
  for (double t : cfg.thresholds) {
    const auto s = summarize(cells, order, classes, t, range, cfg.metric);
    if (!s.ap) return std::nullopt;
    sum += *s.ap;
  }
  return sum / static_cast<double>(cfg.thresholds.size());
}

EvalReport evaluate(std::span<const ImageRecords> images, const MatchConfig& cfg) {
  cfg.validate();
  const auto classes = gt_classes(images);
  if (classes.empty()) throw std::invalid_argument("evaluate: empty ground-truth set");

  const auto cells = build_cells(images, cfg.metric);
  const auto order = image_order(images);
  const AreaRange* all = find_range(cfg, "all");
  const AreaRange& full = all ? *all : kAllAreas;

  EvalReport rep;
  rep.thresholds = cfg.thresholds;
  double sum = 0.0;
  for (double t : cfg.thresholds) {
    const auto s = summarize(cells, order, classes, t, full, cfg.metric);
    const double ap = s.ap.value_or(0.0);
    rep.per_threshold_ap.push_back(ap);
    rep.pr_curves.push_back(s.precision);
    rep.counts.push_back(s.counts);
    sum += ap;
  }
  rep.ap = sum / static_cast<double>(cfg.thresholds.size());

  auto ap_at = [&](double t) {
    for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
      if (cfg.thresholds[i] == t) return rep.per_threshold_ap[i];
    }
    return summarize(cells, order, classes, t, full, cfg.metric).ap.value_or(0.0);
  };
  rep.ap50 = ap_at(0.5);
  rep.ap75 = ap_at(0.75);

  auto range_ap = [&](const char* name) -> std::optional<double> {
    const AreaRange* r = find_range(cfg, name);
    if (r == nullptr) return std::nullopt;
    double total = 0.0;
    for (double t : cfg.thresholds) {
      const auto s = summarize(cells, order, classes, t, *r, cfg.metric);
      if (!s.ap) return std::nullopt;
      total += *s.ap;
    }
    return total / static_cast<double>(cfg.thresholds.size());
  };
  rep.ap_small = range_ap("small");
  rep.ap_medium = range_ap("medium");
  rep.froc = froc(images, cfg.metric, cfg.thresholds.front());
  return rep;
}

std::vector<FrocPoint> froc(std::span<const ImageRecords> images, OverlapMetric metric,
                            double match_threshold) {
  if (images.empty()) throw std::invalid_argument("froc: at least one image is required");
  const auto cells = build_cells(images, metric);
  const auto order = image_order(images);

  std::vector<ScoredOutcome> pooled;
  std::size_t total_gt = 0;
  for (std::size_t k : order) {
    for (const auto& [cls, cell] : cells[k].by_class) {
      total_gt += cell.gts.size();
      const GreedyResult r =
          greedy_match(cell.ov, std::vector<bool>(cell.gts.size(), false),
                       std::vector<bool>(cell.preds.size(), false), match_threshold);
      for (std::size_t i = 0; i < cell.preds.size(); ++i) {
        pooled.push_back({cell.preds[i].score, r.status[i] == PredStatus::kTruePositive});
      }
    }
  }
  // Greedy matching visits predictions by descending score, so the matches
  // made above any score cut are exactly those of the full run.
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });

  std::vector<FrocPoint> points;
  const double n_images = static_cast<double>(images.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    ++(pooled[i].true_positive ? tp : fp);
    if (i + 1 < pooled.size() && pooled[i + 1].score == pooled[i].score) continue;
    FrocPoint p;
    p.score = pooled[i].score;
    p.fp_per_image = static_cast<double>(fp) / n_images;
    p.sensitivity = total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
    points.push_back(p);
  }
  std::stable_sort(points.begin(), points.end(), [](const FrocPoint& a, const FrocPoint& b) {
    return a.fp_per_image < b.fp_per_image;
  });
  return points;
}

namespace {

template <class Shape, class OverlapFn>
double consistency_impl(std::span<const Shape> a, std::span<const Shape> b, OverlapFn&& fn) {
  if (a.empty() && b.empty()) return 1.0;
  struct Pair {
    double ov;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double o = fn(a[i], b[j]);
      if (o > 0.5) pairs.push_back({o, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.ov != y.ov) return x.ov > y.ov;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  std::size_t matched = 0;
  for (const Pair& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    ++matched;
  }
  const double mean_count = 0.5 * static_cast<double>(a.size() + b.size());
  return static_cast<double>(matched) / mean_count;
}

template <class Shape>
MdtReport mdt_impl(std::span<const PolygonMask> masks, std::span<const Shape> dets) {
  if (masks.size() != dets.size()) {
    throw std::invalid_argument("mask_detection_ratio: need one mask per detection");
  }
  MdtReport rep;
  rep.ratios.resize(dets.size());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const double area = dets[k].area();
    if (!(area > 0.0)) {
      ++rep.skipped;
      continue;
    }
    const double r = polygon_area(masks[k]) / area;
    rep.ratios[k] = r;
    sum += r;
    ++used;
  }
  rep.mean = used > 0 ? sum / static_cast<double>(used) : 0.0;
  return rep;
}

}  // namespace

double rotation_consistency(std::span<const Circle> a, std::span<const Circle> b,
                            OverlapMetric metric) {
  return consistency_impl(a, b, [metric](const Circle& x, const Circle& y) {
    return overlap(x, y, metric);
  });
}

double rotation_consistency(std::span<const Box> a, std::span<const Box> b) {
  return consistency_impl(a, b, [](const Box& x, const Box& y) { return box_iou(x, y); });
}

MdtReport mask_detection_ratio(std::span<const PolygonMask> masks, std::span<const Circle> dets) {
  return mdt_impl(masks, dets);
}

MdtReport mask_detection_ratio(std::span<const PolygonMask> masks, std::span<const Box> dets) {
  return mdt_impl(masks, dets);
}

std::vector<DisplacementRow> displacement_study(const Circle& shape,
                                                std::span<const double> displacements,
                                                int trials, std::uint64_t seed,
                                                DisplacementMode mode) {
  if (trials < 1) throw std::invalid_argument("displacement_study: trials must be >= 1");
  for (double d : displacements) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("displacement_study: displacements must be >= 0");
    }
  }
  std::vector<double> angles(static_cast<std::size_t>(trials), 0.0);
  if (mode == DisplacementMode::kIsotropic) {
    Rng rng(seed);
    for (double& a : angles) a = rng.uniform(0.0, 2.0 * kPi);
  }
  const Box box = circle_to_tight_box(shape);
  std::vector<DisplacementRow> rows;
  rows.reserve(displacements.size());
  for (double d : displacements) {
    double sum_box = 0.0;
    double sum_circle = 0.0;
    for (double a : angles) {
      const double dx = d * std::cos(a);
      const double dy = d * std::sin(a);
      Circle moved = shape;
      moved.center = {shape.center.x + dx, shape.center.y + dy};
      Box moved_box = box;
      moved_box.min = {box.min.x + dx, box.min.y + dy};
      sum_circle += ciou(shape, moved);
      sum_box += box_iou(box, moved_box);
    }
    rows.push_back({d, sum_box / trials, sum_circle / trials});
  }
  return rows;
}

double max_metric_gap(std::span<const DisplacementRow> rows) {
  double gap = 0.0;
  for (const auto& r : rows) gap = std::max(gap, std::abs(r.box_iou - r.ciou));
  return gap;
}

}  // namespace circlenet
