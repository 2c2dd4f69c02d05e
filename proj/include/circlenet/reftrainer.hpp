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
#include <stdexcept>
#include <string>
#include <vector>

#include "circlenet/decode.hpp"
#include "circlenet/encode.hpp"
#include "circlenet/eval.hpp"
#include "circlenet/losses.hpp"
#include "circlenet/synth.hpp"

namespace circlenet {

struct FitConfig {
  enum class Init { kZeros, kNoise };

  int steps = 500;
  double learning_rate = 0.5;
  Init init = Init::kZeros;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  LossWeights weights;
  int record_every = 1;
  /// Step halvings tried when a full step would raise L_det. 0 gives a
  /// fixed-step descent.
  int max_backtracks = 40;

  void validate() const;
};

struct LossSnapshot {
  int step = 0;
  double focal = 0.0;
  double offset = 0.0;
  double radius = 0.0;
  double total = 0.0;
};

struct FitResult {
  OutputMaps maps;
  std::vector<LossSnapshot> trajectory;  // step 0 is the initial loss
};

class FitDivergence : public std::runtime_error {
 public:
  FitDivergence(int step, double loss, double initial);
  int step() const { return step_; }

 private:
  int step_;
};

/// Initial maps for `targets` under cfg.init.
OutputMaps initial_maps(const HeatmapTargets& targets, const FitConfig& cfg);

/// Full-batch gradient descent on every map entry against total_loss,
/// starting from initial_maps(targets, cfg).
FitResult fit_maps(const HeatmapTargets& targets, const FitConfig& cfg);

/// Same, starting from caller-provided maps.
FitResult fit_maps(const HeatmapTargets& targets, OutputMaps start, const FitConfig& cfg);

/// True when every recorded L_det is within `tol` of (or below) the one
/// before it, ignoring the first `skip` steps.
bool is_non_increasing(const std::vector<LossSnapshot>& trajectory, int skip, double tol);

struct EndToEndResult {
  Scene scene;
  FitResult fit;
  std::vector<Circle> detections;
  EvalReport report;
};

/// generate -> encode -> fit_maps -> decode -> evaluate on a single scene.
EndToEndResult end_to_end_check(const SceneConfig& scene_cfg, const FitConfig& fit_cfg,
                                const MatchConfig& eval_cfg, const EncoderConfig& enc_cfg,
                                const DecodeConfig& dec_cfg);

/// Convenience overload: encoder sized to the scene with default stride and
/// sigma policy, default decoding.
EvalReport end_to_end_check(const SceneConfig& scene_cfg, const FitConfig& fit_cfg,
                            const MatchConfig& eval_cfg);

}  // namespace circlenet
