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

#include "circlenet/decode.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace circlenet {

void DecodeConfig::validate() const {
  if (top_n < 1) throw std::invalid_argument("DecodeConfig: top_n must be >= 1");
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw std::invalid_argument("DecodeConfig: score_threshold must be in [0, 1]");
  }
  if (stride < 1) throw std::invalid_argument("DecodeConfig: stride must be >= 1");
  if (!(nms_threshold >= 0.0 && nms_threshold <= 1.0)) {
    throw std::invalid_argument("DecodeConfig: nms_threshold must be in [0, 1]");
  }
}

std::vector<Peak> extract_peaks(const Grid& heatmap, const DecodeConfig& cfg) {
  cfg.validate();
  std::vector<Peak> peaks;
  for (int c = 0; c < heatmap.channels(); ++c) {
    for (int y = 0; y < heatmap.height(); ++y) {
      for (int x = 0; x < heatmap.width(); ++x) {
        const double v = heatmap.at(c, y, x);
        if (v < cfg.score_threshold) continue;
        bool is_peak = true;
        for (int dy = -1; dy <= 1 && is_peak; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || !heatmap.contains(y + dy, x + dx)) continue;
            if (heatmap.at(c, y + dy, x + dx) > v) {
              is_peak = false;
              break;
            }
          }
        }
        if (is_peak) peaks.push_back({x, y, c, v});
      }
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.category, a.y, a.x) < std::tie(b.category, b.y, b.x);
  });
  if (peaks.size() > static_cast<std::size_t>(cfg.top_n)) peaks.resize(cfg.top_n);
  return peaks;
}

std::vector<Circle> decode_circles(const OutputMaps& maps, const DecodeConfig& cfg) {
  const Grid& logits = maps.heatmap_logits;
  if (maps.radius.channels() != 1 || maps.offset.channels() != 2 ||
      maps.radius.height() != logits.height() || maps.radius.width() != logits.width() ||
      maps.offset.height() != logits.height() || maps.offset.width() != logits.width()) {
    throw std::invalid_argument("decode_circles: inconsistent map shapes");
  }
  const std::vector<Peak> peaks = extract_peaks(squash(logits), cfg);
  const double R = cfg.stride;
  std::vector<Circle> out;
  out.reserve(peaks.size());
  for (const Peak& p : peaks) {
    Circle c;
    c.center = {(p.x + maps.offset.at(0, p.y, p.x)) * R, (p.y + maps.offset.at(1, p.y, p.x)) * R};
    c.radius = std::max(0.0, maps.radius.at(0, p.y, p.x)) * R;
    c.score = p.score;
    c.category = p.category;
    out.push_back(c);
  }
  if (cfg.apply_nms) out = circle_nms(out, cfg.nms_threshold);
  return out;
}

OutputMaps rotate_maps(const OutputMaps& maps, int turns) {
  if (turns < 0 || turns > 3) throw std::invalid_argument("rotate_maps: turns must be in 0..3");
  OutputMaps cur = maps;
  for (int t = 0; t < turns; ++t) {
    const int h = cur.heatmap_logits.height();
    const int w = cur.heatmap_logits.width();
    OutputMaps next(cur.heatmap_logits.channels(), w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int nx = y;
        const int ny = w - 1 - x;
        for (int c = 0; c < cur.heatmap_logits.channels(); ++c) {
          next.heatmap_logits.at(c, ny, nx) = cur.heatmap_logits.at(c, y, x);
        }
        next.radius.at(0, ny, nx) = cur.radius.at(0, y, x);
        next.offset.at(0, ny, nx) = cur.offset.at(1, y, x);
        next.offset.at(1, ny, nx) = 1.0 - cur.offset.at(0, y, x);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace circlenet
