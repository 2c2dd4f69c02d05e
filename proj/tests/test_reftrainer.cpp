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
#include <vector>

#include "circlenet/reftrainer.hpp"

using namespace circlenet;

namespace {

const Circle kSingle = [] {
  Circle c;
  c.center = {30.6, 25.3};
  c.radius = 10.0;
  return c;
}();

HeatmapTargets single_targets() {
  EncoderConfig enc;
  enc.input_w = 64;
  enc.input_h = 64;  // 16 x 16 output grid
  return encode(std::vector<Circle>{kSingle}, enc);
}

}  // namespace

TEST(FitMaps, FlatAtOptimum) {
  const auto t = single_targets();
  FitConfig cfg;
  cfg.steps = 20;
  const auto r = fit_maps(t, optimal_maps(t), cfg);
  for (const auto& s : r.trajectory) EXPECT_EQ(s.total, r.trajectory.front().total);
  EXPECT_LT(r.trajectory.front().total, 1e-12);
}

TEST(FitMaps, SingleObjectReferenceCase) {
  const auto t = single_targets();
  FitConfig cfg;  // 500 steps, lr 0.5, zero init
  const auto r = fit_maps(t, cfg);
  EXPECT_TRUE(is_non_increasing(r.trajectory, 10, 1e-9));
  DecodeConfig dc;
  dc.top_n = 1;
  const auto out = decode_circles(r.maps, dc);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(std::hypot(out[0].center.x - kSingle.center.x, out[0].center.y - kSingle.center.y) / 4.0, 0.5);
  EXPECT_LE(std::abs(out[0].radius - kSingle.radius) / kSingle.radius, 0.02);
  EXPECT_EQ(r.trajectory.size(), 501u);
}

TEST(FitMaps, AllTermsBelowThousandthWithLargerStep) {
  const auto t = single_targets();
  FitConfig cfg;
  cfg.learning_rate = 32.0;
  const auto r = fit_maps(t, cfg);
  const auto& last = r.trajectory.back();
  EXPECT_LT(last.focal, 1e-3);
  EXPECT_LT(last.radius, 1e-3);
  EXPECT_LT(last.offset, 1e-3);
  EXPECT_TRUE(is_non_increasing(r.trajectory, 0, 1e-9));
}

TEST(FitMaps, ZeroRadiusWeightFreezesRadiusMap) {
  const auto t = single_targets();
  FitConfig cfg;
  cfg.steps = 50;
  cfg.init = FitConfig::Init::kNoise;
  cfg.seed = 3;
  cfg.weights.lambda_radius = 0.0;
  const auto start = initial_maps(t, cfg);
  const auto r = fit_maps(t, cfg);
  EXPECT_EQ(r.maps.radius, start.radius);
  EXPECT_NE(r.maps.offset, start.offset);
}

TEST(FitMaps, DeterministicAndRecordEvery) {
  const auto t = single_targets();
  FitConfig cfg;
  cfg.steps = 30;
  cfg.record_every = 7;
  cfg.init = FitConfig::Init::kNoise;
  cfg.seed = 11;
  const auto a = fit_maps(t, cfg);
  const auto b = fit_maps(t, cfg);
  EXPECT_EQ(a.maps.heatmap_logits, b.maps.heatmap_logits);
  std::vector<int> steps;
  for (const auto& s : a.trajectory) steps.push_back(s.step);
  EXPECT_EQ(steps, (std::vector<int>{0, 7, 14, 21, 28, 30}));
}

TEST(FitMaps, FixedStepDivergenceIsReported) {
  const auto t = single_targets();
  FitConfig cfg;
  cfg.max_backtracks = 0;
  cfg.learning_rate = 1e4;
  cfg.steps = 5;
  EXPECT_THROW(fit_maps(t, cfg), FitDivergence);
  cfg.steps = 0;
  EXPECT_THROW(fit_maps(t, cfg), std::invalid_argument);
}

TEST(EndToEnd, FiveObjectSceneReachesFullAp50) {
  SceneConfig sc;
  sc.min_objects = sc.max_objects = 5;
  sc.seed = 1;
  FitConfig fc;
  fc.learning_rate = 2.0;
  const auto rep = end_to_end_check(sc, fc, MatchConfig{});
  EXPECT_EQ(rep.ap50, 1.0);
}

TEST(EndToEnd, UntrainedNoiseMapsScoreNearZero) {
  SceneConfig sc;
  sc.min_objects = sc.max_objects = 5;
  sc.seed = 1;
  FitConfig fc;
  fc.steps = 1;  // the smallest fit the config allows
  fc.init = FitConfig::Init::kNoise;
  fc.noise_sigma = 1.0;
  fc.seed = 2;
  const auto rep = end_to_end_check(sc, fc, MatchConfig{});
  EXPECT_LT(rep.ap50, 0.05);
}

TEST(EndToEnd, RotatedSceneIsConsistent) {
  SceneConfig sc;
  sc.min_objects = sc.max_objects = 5;
  sc.seed = 4;
  const Scene s = generate_scene(sc);
  EncoderConfig enc;
  FitConfig fc;
  fc.learning_rate = 2.0;
  DecodeConfig dec;
  dec.score_threshold = 0.5;

  std::vector<Circle> rotated;
  for (const auto& c : s.circles) rotated.push_back(rotate90(c, 512, 512, 1));
  const auto a = decode_circles(fit_maps(encode(s.circles, enc), fc).maps, dec);
  const auto b_rot = decode_circles(fit_maps(encode(rotated, enc), fc).maps, dec);
  std::vector<Circle> b;
  for (const auto& c : b_rot) b.push_back(unrotate90(c, 512, 512, 1));
  EXPECT_EQ(a.size(), 5u);
  EXPECT_GE(rotation_consistency(a, b), 0.95);
}
