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


#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "circlenet/eval.hpp"
#include "circlenet/random.hpp"
#include "eval_fixtures.hpp"
#include "oracles.hpp"

using namespace circlenet;

namespace {

Circle C(double x, double y, double r, double score = 1.0, int cls = 0) {
  Circle c;
  c.center = {x, y};
  c.radius = r;
  c.score = score;
  c.category = cls;
  return c;
}

ImageRecords image(std::int64_t id, std::vector<Circle> gts, std::vector<Circle> preds) {
  ImageRecords im;
  im.image_id = id;
  im.width = 256;
  im.height = 256;
  im.gts = std::move(gts);
  im.preds = std::move(preds);
  return im;
}

}  // namespace

TEST(MatchDetections, Examples) {
  // concentric, radius ratio sqrt(0.6): ciou 0.6
  const std::vector<Circle> gts = {C(50, 50, 10)};
  const std::vector<Circle> preds = {C(50, 50, 10 * std::sqrt(0.6))};
  const auto m = match_detections(preds, gts, OverlapMetric::kCiou, 0.5);
  EXPECT_EQ(m.true_positives.size(), 1u);
  EXPECT_TRUE(m.false_positives.empty());
  EXPECT_TRUE(m.false_negatives.empty());

  const std::vector<Circle> two = {C(10, 10, 5), C(40, 40, 5)};
  const auto none = match_detections(std::vector<Circle>{}, two, OverlapMetric::kCiou, 0.5);
  EXPECT_EQ(none.false_negatives, (std::vector<std::size_t>{0, 1}));
}

TEST(MatchDetections, HigherScoreClaimsFirst) {
  const std::vector<Circle> gts = {C(50, 50, 10), C(53, 50, 10)};
  // pred 0 has lower score but fits gt 0 perfectly
  const std::vector<Circle> preds = {C(50, 50, 10, 0.5), C(51, 50, 10, 0.9)};
  const auto m = match_detections(preds, gts, OverlapMetric::kCiou, 0.5);
  ASSERT_EQ(m.true_positives.size(), 2u);
  EXPECT_EQ(m.true_positives[0], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(m.true_positives[1], (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(MatchDetections, MatchesLexicographicOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const auto im = oracle::small_fixture(rng, 1, 4, 3);
    for (double t : {0.3, 0.5, 0.75}) {
      const auto m = match_detections(im.preds, im.gts, OverlapMetric::kCiou, t);
      const auto brute = oracle::brute_image(im, OverlapMetric::kCiou, t);
      ASSERT_EQ(m.true_positives.size(),
                static_cast<std::size_t>(std::count_if(brute.begin(), brute.end(),
                                                       [](const auto& o) { return o.tp; })));
      ASSERT_EQ(m.true_positives.size() + m.false_positives.size(), im.preds.size());
      ASSERT_EQ(m.true_positives.size() + m.false_negatives.size(), im.gts.size());
    }
  }
}

TEST(AveragePrecision, Examples) {
  const std::vector<ScoredOutcome> hit = {{0.9, true}};
  EXPECT_EQ(average_precision(hit, 1).ap, 1.0);
  const std::vector<ScoredOutcome> miss = {{0.9, false}};
  EXPECT_EQ(average_precision(miss, 1).ap, 0.0);
  const std::vector<ScoredOutcome> fp_then_tp = {{0.9, false}, {0.8, true}};
  const auto pr = average_precision(fp_then_tp, 1);
  EXPECT_EQ(pr.ap, 0.5);
  for (double p : pr.precision) EXPECT_EQ(p, 0.5);
  EXPECT_THROW(average_precision(hit, 0), std::invalid_argument);
}

TEST(AveragePrecision, MatchesDefinition) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(0, 12));
    std::vector<ScoredOutcome> outcomes;
    std::vector<bool> ranked;
    std::size_t tps = 0;
    for (int i = 0; i < n; ++i) {
      const bool tp = rng.bernoulli(0.5);
      tps += tp;
      outcomes.push_back({1.0 - i * 0.01, tp});
      ranked.push_back(tp);
    }
    const std::size_t num_gt = tps + static_cast<std::size_t>(rng.uniform_int(tps == 0 ? 1 : 0, 3));
    ASSERT_EQ(average_precision(outcomes, num_gt).ap, oracle::definition_ap(ranked, num_gt));
  }
}

TEST(Evaluate, PerfectPredictions) {
  std::vector<ImageRecords> ims = {image(1, {C(40, 40, 10), C(100, 100, 30)}, {}),
                                   image(2, {C(60, 60, 20, 1.0, 1)}, {})};
  for (auto& im : ims) im.preds = im.gts;
  const auto rep = evaluate(ims);
  EXPECT_EQ(rep.ap, 1.0);
  EXPECT_EQ(rep.ap50, 1.0);
  EXPECT_EQ(rep.ap75, 1.0);
  ASSERT_TRUE(rep.ap_small.has_value());
  EXPECT_EQ(*rep.ap_small, 1.0);
  ASSERT_TRUE(rep.ap_medium.has_value());
  EXPECT_EQ(*rep.ap_medium, 1.0);
  ASSERT_EQ(rep.froc.size(), 1u);
  EXPECT_EQ(rep.froc[0].sensitivity, 1.0);
  EXPECT_EQ(rep.froc[0].fp_per_image, 0.0);
}

TEST(Evaluate, UniformOverlapBetweenThresholds) {
  // Concentric pairs with ciou 0.62: matched at 0.50, 0.55, 0.60 only.
  const double k = std::sqrt(0.62);
  std::vector<ImageRecords> ims = {
      image(1, {C(40, 40, 10), C(120, 60, 20)}, {C(40, 40, 10 * k, 0.9), C(120, 60, 20 * k, 0.8)}),
      image(2, {C(70, 70, 15)}, {C(70, 70, 15 * k, 0.7)})};
  const auto rep = evaluate(ims);
  EXPECT_EQ(rep.ap50, 1.0);
  EXPECT_EQ(rep.ap75, 0.0);
  EXPECT_NEAR(rep.ap, 0.3, 1e-15);
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    EXPECT_EQ(rep.per_threshold_ap[i], rep.thresholds[i] <= 0.6 ? 1.0 : 0.0);
  }
}

TEST(Evaluate, AreaBuckets) {
  const double r = 40.0 / std::sqrt(kPi);  // area 40^2
  std::vector<ImageRecords> ims = {image(1, {C(100, 100, r)}, {C(100, 100, r)})};
  const auto rep = evaluate(ims);
  EXPECT_FALSE(rep.ap_small.has_value());
  ASSERT_TRUE(rep.ap_medium.has_value());
  EXPECT_EQ(*rep.ap_medium, 1.0);
  EXPECT_EQ(bucket_area(C(0, 0, 16), OverlapMetric::kBoxIou), 32.0 * 32.0);
}

TEST(Evaluate, SmallRangeIgnoresOutOfRangeUnmatched) {
  // small gt matched; unmatched large prediction is ignored in AP_S
  std::vector<ImageRecords> ims = {
      image(1, {C(30, 30, 5), C(150, 150, 50)}, {C(30, 30, 5, 0.5), C(60, 200, 30, 0.9)})};
  const auto rep = evaluate(ims);
  ASSERT_TRUE(rep.ap_small.has_value());
  EXPECT_EQ(*rep.ap_small, 1.0);
  EXPECT_LT(rep.ap, 1.0);
}

TEST(Evaluate, Errors) {
  std::vector<ImageRecords> ims = {image(1, {}, {C(1, 1, 1)})};
  EXPECT_THROW(evaluate(ims), std::invalid_argument);
  ims[0].gts = {C(1, 1, 1)};
  MatchConfig cfg;
  cfg.thresholds = {0.7, 0.5};
  EXPECT_THROW(evaluate(ims, cfg), std::invalid_argument);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  Rng rng(77);
  const auto thresholds = coco_thresholds();
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<ImageRecords> ims = {oracle::small_fixture(rng, 1, 4, 3)};
    if (trial % 3 == 0) ims.push_back(oracle::small_fixture(rng, 2, 4, 3));
    for (auto metric : {OverlapMetric::kCiou, OverlapMetric::kBoxIou}) {
      MatchConfig cfg;
      cfg.metric = metric;
      ASSERT_EQ(evaluate(ims, cfg).ap, oracle::brute_ap(ims, metric, thresholds)) << "trial " << trial;
    }
  }
}

TEST(EvaluateProperty, PartitionInvariance) {
  // The same pooled predictions split differently across images give the
  // same AP when the images are far apart in content.
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ImageRecords> ims;
    for (int k = 0; k < 3; ++k) ims.push_back(oracle::small_fixture(rng, k, 4, 3));
    for (auto& im : ims) {
      for (auto& p : im.preds) p.score += 1e-3 * static_cast<double>(rng.uniform_int(0, 100));
    }
    // Merge into one image with content shifted so images cannot interact.
    ImageRecords merged = image(0, {}, {});
    for (std::size_t k = 0; k < ims.size(); ++k) {
      for (auto g : ims[k].gts) {
        g.center.x += 100.0 * static_cast<double>(k);
        merged.gts.push_back(g);
      }
      for (auto p : ims[k].preds) {
        p.center.x += 100.0 * static_cast<double>(k);
        merged.preds.push_back(p);
      }
    }
    std::vector<ImageRecords> one = {merged};
    ASSERT_NEAR(evaluate(ims).ap, evaluate(one).ap, 1e-12);
  }
}

TEST(EvaluateProperty, NonIncreasingInThreshold) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    // Every prediction matches its own gt with a fixed overlap and nothing else.
    ImageRecords im = image(1, {}, {});
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    for (int i = 0; i < n; ++i) {
      const double r = 8;
      im.gts.push_back(C(20 + 40 * i, 50, r));
      if (rng.bernoulli(0.8)) {
        im.preds.push_back(C(20 + 40 * i, 50, r * std::sqrt(rng.uniform(0.4, 1.0)), rng.uniform()));
      }
    }
    if (im.preds.empty()) continue;
    std::vector<ImageRecords> ims = {im};
    const auto rep = evaluate(ims);
    for (std::size_t i = 1; i < rep.per_threshold_ap.size(); ++i) {
      ASSERT_LE(rep.per_threshold_ap[i], rep.per_threshold_ap[i - 1]);
    }
  }
}

TEST(Froc, Examples) {
  std::vector<ImageRecords> ims = {image(1, {C(40, 40, 10)}, {C(40, 40, 10, 0.9)}),
                                   image(2, {C(80, 80, 10)}, {C(80, 80, 10, 0.9)})};
  auto pts = froc(ims, OverlapMetric::kCiou, 0.5);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].sensitivity, 1.0);
  EXPECT_EQ(pts[0].fp_per_image, 0.0);

  ims[0].preds = {C(200, 200, 10, 0.8), C(10, 200, 10, 0.4)};
  ims[1].preds = {C(200, 10, 10, 0.6)};
  pts = froc(ims, OverlapMetric::kCiou, 0.5);
  ASSERT_EQ(pts.size(), 3u);
  for (const auto& p : pts) EXPECT_EQ(p.sensitivity, 0.0);
  EXPECT_EQ(pts.back().fp_per_image, 1.5);

  std::vector<ImageRecords> empty_preds = {image(1, {C(1, 1, 1)}, {})};
  EXPECT_TRUE(froc(empty_preds, OverlapMetric::kCiou, 0.5).empty());
  EXPECT_THROW(froc(std::vector<ImageRecords>{}, OverlapMetric::kCiou, 0.5), std::invalid_argument);
}

TEST(Froc, MatchesPerCutBruteForce) {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ImageRecords> ims = {oracle::small_fixture(rng, 1, 4, 3), oracle::small_fixture(rng, 2, 4, 3)};
    const auto pts = froc(ims, OverlapMetric::kCiou, 0.5);
    std::set<double> scores;
    std::size_t total_gt = 0;
    for (const auto& im : ims) {
      total_gt += im.gts.size();
      for (const auto& p : im.preds) scores.insert(p.score);
    }
    ASSERT_EQ(pts.size(), scores.size());
    double prev_sens = -1.0;
    for (const auto& p : pts) {
      // Re-run matching from scratch on the predictions at or above the cut.
      std::size_t tp = 0;
      std::size_t fp = 0;
      for (auto im : ims) {
        std::erase_if(im.preds, [&](const Circle& c) { return c.score < p.score; });
        for (const auto& o : oracle::brute_image(im, OverlapMetric::kCiou, 0.5)) ++(o.tp ? tp : fp);
      }
      ASSERT_EQ(p.sensitivity, static_cast<double>(tp) / static_cast<double>(total_gt));
      ASSERT_EQ(p.fp_per_image, static_cast<double>(fp) / 2.0);
      ASSERT_GE(p.sensitivity, prev_sens);
      prev_sens = p.sensitivity;
    }
  }
}

TEST(RotationConsistency, Examples) {
  const std::vector<Circle> a = {C(40, 40, 10), C(100, 100, 20)};
  EXPECT_EQ(rotation_consistency(a, a), 1.0);
  const std::vector<Circle> b = {C(200, 200, 10)};
  EXPECT_EQ(rotation_consistency(a, b), 0.0);
  EXPECT_EQ(rotation_consistency(std::vector<Circle>{}, std::vector<Circle>{}), 1.0);
  // one of two kept: 1 / ((2 + 1) / 2)
  EXPECT_DOUBLE_EQ(rotation_consistency(a, std::vector<Circle>{a[0]}), 2.0 / 3.0);
  std::vector<Box> boxes;
  for (const auto& c : a) boxes.push_back(circle_to_tight_box(c));
  EXPECT_EQ(rotation_consistency(boxes, boxes), 1.0);
}

TEST(RotationConsistency, RotatedAndMappedBackIsOne) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Circle> gt;
    for (int i = 0; i < 8; ++i) gt.push_back(C(rng.uniform(0, 300), rng.uniform(0, 200), rng.uniform(1, 30)));
    for (int turns = 1; turns <= 3; ++turns) {
      std::vector<Circle> back;
      for (const auto& c : gt) {
        back.push_back(unrotate90(rotate90(c, 300, 200, turns), 300, 200, turns));
      }
      ASSERT_EQ(rotation_consistency(gt, back), 1.0);
    }
  }
}

TEST(RotationConsistency, DropoutMatchesPairingOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    // Disjoint gts, detections jittered, then one set loses ~10%.
    std::vector<Circle> a;
    for (int i = 0; i < 10; ++i) a.push_back(C(30 + 60 * (i % 5), 30 + 60 * (i / 5), rng.uniform(8, 20)));
    std::vector<Circle> b;
    for (const auto& c : a) {
      if (rng.bernoulli(0.1)) continue;
      b.push_back(C(c.center.x + rng.normal(0, 1), c.center.y + rng.normal(0, 1), c.radius * rng.uniform(0.9, 1.1)));
    }
    std::vector<std::vector<double>> ov(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) ov[i][j] = ciou(a[i], b[j]);
    }
    const double want = static_cast<double>(oracle::max_pairing(ov)) / (0.5 * static_cast<double>(a.size() + b.size()));
    ASSERT_EQ(rotation_consistency(a, b), want);
  }
}

TEST(MaskDetectionRatio, InscribedPolygonAndSquare) {
  const Circle c = C(50, 50, 20);
  const std::vector<PolygonMask> poly = {inscribed_polygon(c, 360)};
  const std::vector<Circle> dets = {c};
  const auto rep = mask_detection_ratio(poly, dets);
  EXPECT_GE(rep.mean, 0.9999);
  EXPECT_NEAR(rep.mean, oracle::regular_polygon_area(20, 360) / (kPi * 400), 1e-12);

  const double r = 20;
  const std::vector<PolygonMask> square = {
      PolygonMask({{50 - r, 50 - r}, {50 + r, 50 - r}, {50 + r, 50 + r}, {50 - r, 50 + r}})};
  const std::vector<Box> tight = {Box{{50 - r, 50 - r}, 2 * r, 2 * r}};
  EXPECT_NEAR(mask_detection_ratio(square, tight).mean, 1.0, 1e-15);
  const std::vector<Circle> circumscribed = {C(50, 50, r * std::sqrt(2.0))};
  EXPECT_NEAR(mask_detection_ratio(square, circumscribed).mean, 2.0 / kPi, 1e-6);
}

TEST(MaskDetectionRatio, ZeroAreaSkipped) {
  const std::vector<PolygonMask> masks = {inscribed_polygon(C(10, 10, 5), 32), inscribed_polygon(C(40, 40, 5), 32)};
  const std::vector<Circle> dets = {C(10, 10, 0), C(40, 40, 5)};
  const auto rep = mask_detection_ratio(masks, dets);
  EXPECT_EQ(rep.skipped, 1u);
  EXPECT_FALSE(rep.ratios[0].has_value());
  EXPECT_EQ(rep.mean, *rep.ratios[1]);
  EXPECT_THROW(mask_detection_ratio(masks, std::vector<Circle>{dets[0]}), std::invalid_argument);
}

TEST(DisplacementStudy, AxialAtRadius) {
  const std::vector<double> d = {0, 20, 40, 100};
  const auto rows = displacement_study(C(100, 100, 20), d, 1, 0, DisplacementMode::kAxial);
  EXPECT_EQ(rows[0].box_iou, 1.0);
  EXPECT_EQ(rows[0].ciou, 1.0);
  EXPECT_NEAR(rows[1].box_iou, 1.0 / 3.0, 1e-12);
  const double lens = oracle::equal_radius_lens(20, 20);
  EXPECT_NEAR(rows[1].ciou, lens / (2 * kPi * 400 - lens), 1e-12);
  EXPECT_NEAR(rows[1].ciou, 0.2430, 1e-3);
  EXPECT_EQ(rows[2].ciou, 0.0);
  EXPECT_EQ(rows[2].box_iou, 0.0);
}

TEST(DisplacementStudy, IsotropicMonotoneAndDeterministic) {
  std::vector<double> d;
  for (int i = 0; i <= 100; ++i) d.push_back(i);
  const auto rows = displacement_study(C(256, 256, 20), d, 200, 42);
  EXPECT_EQ(rows.front().box_iou, 1.0);
  EXPECT_EQ(rows.front().ciou, 1.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_LE(rows[i].ciou, rows[i - 1].ciou);
    ASSERT_LE(rows[i].box_iou, rows[i - 1].box_iou);
    // At exactly 2r the rotated translation vector may round a hair short.
    if (rows[i].displacement >= 40) ASSERT_LE(rows[i].ciou, 1e-12);
    if (rows[i].displacement > 40) ASSERT_EQ(rows[i].ciou, 0.0);
  }
  // The box curve is still positive between 2r and the box diagonal.
  EXPECT_GT(rows[45].box_iou, 0.0);
  EXPECT_EQ(rows[57].box_iou, 0.0);
  const auto again = displacement_study(C(256, 256, 20), d, 200, 42);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].ciou, again[i].ciou);
  EXPECT_LE(max_metric_gap(rows), 0.1);
  EXPECT_THROW(displacement_study(C(0, 0, 1), std::vector<double>{-1.0}, 1, 0), std::invalid_argument);
}
