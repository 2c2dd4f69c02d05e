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

// Test-only reference computations. None of these call into the code paths
// they are used to check, apart from the overlap primitive where a test
// states so explicitly.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "circlenet/geometry.hpp"

namespace oracle {

using circlenet::Circle;

inline constexpr double kPi = 3.14159265358979323846;

/// Disc intersection area by integrating the overlap of vertical chords
/// with the midpoint rule.
inline double quadrature_intersection(const Circle& a, const Circle& b, int n = 200000) {
  const double x0 = std::max(a.center.x - a.radius, b.center.x - b.radius);
  const double x1 = std::min(a.center.x + a.radius, b.center.x + b.radius);
  if (!(x1 > x0)) return 0.0;
  const double h = (x1 - x0) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (i + 0.5) * h;
    const double ha = std::sqrt(std::max(0.0, a.radius * a.radius - (x - a.center.x) * (x - a.center.x)));
    const double hb = std::sqrt(std::max(0.0, b.radius * b.radius - (x - b.center.x) * (x - b.center.x)));
    const double lo = std::max(a.center.y - ha, b.center.y - hb);
    const double hi = std::min(a.center.y + ha, b.center.y + hb);
    sum += std::max(0.0, hi - lo);
  }
  return sum * h;
}

inline double quadrature_ciou(const Circle& a, const Circle& b) {
  const double inter = quadrature_intersection(a, b);
  const double uni = kPi * a.radius * a.radius + kPi * b.radius * b.radius - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Equal-radius lens: 2 r^2 acos(d / 2r) - (d / 2) sqrt(4 r^2 - d^2).
inline double equal_radius_lens(double r, double d) {
  return 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
}

inline double regular_polygon_area(double r, int n) {
  return 0.5 * n * r * r * std::sin(2.0 * kPi / n);
}

/// Greedy NMS characterised without simulating it: the kept set S is the
/// unique subset where no kept pair overlaps at or above t, and every
/// dropped item overlaps some kept item that precedes it in `order`.
/// Items are indices into `circles` visited in `order`.
inline std::vector<std::size_t> exhaustive_nms(const std::vector<Circle>& circles,
                                               const std::vector<std::size_t>& order, double t,
                                               const std::function<double(const Circle&, const Circle&)>& ov) {
  const std::size_t n = order.size();
  std::vector<std::size_t> found;
  int matches = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool kept_i = mask >> i & 1;
      if (kept_i) {
        for (std::size_t j = 0; j < i && ok; ++j) {
          if ((mask >> j & 1) && ov(circles[order[i]], circles[order[j]]) >= t) ok = false;
        }
      } else {
        bool covered = false;
        for (std::size_t j = 0; j < i; ++j) {
          if ((mask >> j & 1) && ov(circles[order[i]], circles[order[j]]) >= t) covered = true;
        }
        if (!covered) ok = false;
      }
    }
    if (ok) {
      ++matches;
      found.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) found.push_back(order[i]);
      }
    }
  }
  if (matches != 1) found.assign(1, static_cast<std::size_t>(-1));
  return found;
}

/// Greedy matching as a lexicographic optimum: over every injective partial
/// assignment of predictions (in visiting order) to ground truths with
/// overlap >= t, pick the one whose per-prediction overlap vector (-1 for
/// unassigned) is lexicographically largest; equal overlaps prefer the
/// lower gt index. Returns gt index per visited prediction, -1 if none.
inline std::vector<int> lexicographic_matching(const std::vector<std::vector<double>>& ov, double t) {
  const std::size_t np = ov.size();
  const std::size_t ng = np ? ov[0].size() : 0;
  std::vector<int> best;
  std::vector<double> best_key;
  std::vector<int> cur(np, -1);
  std::vector<bool> used(ng, false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == np) {
      std::vector<double> key;
      for (std::size_t k = 0; k < np; ++k) {
        key.push_back(cur[k] < 0 ? -1.0 : ov[k][static_cast<std::size_t>(cur[k])]);
        key.push_back(cur[k] < 0 ? 0.0 : -static_cast<double>(cur[k]));
      }
      if (best.empty() && best_key.empty() ? true : key > best_key) {
        best_key = key;
        best = cur;
      }
      return;
    }
    cur[i] = -1;
    rec(i + 1);
    for (std::size_t g = 0; g < ng; ++g) {
      if (used[g] || ov[i][g] < t) continue;
      used[g] = true;
      cur[i] = static_cast<int>(g);
      rec(i + 1);
      used[g] = false;
      cur[i] = -1;
    }
  };
  rec(0);
  if (np == 0) return {};
  return best;
}

/// 101-point interpolated AP straight from the definition: at each recall
/// level r, the best precision over all ranking cutoffs reaching recall r.
inline double definition_ap(const std::vector<bool>& ranked_tp, std::size_t num_gt) {
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0.0;
    double tp = 0.0;
    for (std::size_t c = 0; c < ranked_tp.size(); ++c) {
      if (ranked_tp[c]) tp += 1.0;
      const double recall = tp / static_cast<double>(num_gt);
      const double precision = tp / static_cast<double>(c + 1);
      if (recall >= r) best = std::max(best, precision);
    }
    sum += best;
  }
  return sum / 101.0;
}

/// Maximum number of disjoint pairs with overlap > 0.5, by exhaustive
/// search over assignments.
inline std::size_t max_pairing(const std::vector<std::vector<double>>& ov) {
  const std::size_t na = ov.size();
  const std::size_t nb = na ? ov[0].size() : 0;
  std::vector<bool> used(nb, false);
  std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
    if (i == na) return 0;
    std::size_t best = rec(i + 1);
    for (std::size_t j = 0; j < nb; ++j) {
      if (used[j] || !(ov[i][j] > 0.5)) continue;
      used[j] = true;
      best = std::max(best, 1 + rec(i + 1));
      used[j] = false;
    }
    return best;
  };
  return rec(0);
}

/// Central finite difference of f at x[i].
inline double central_difference(const std::function<double()>& f, double& x, double h) {
  const double keep = x;
  x = keep + h;
  const double up = f();
  x = keep - h;
  const double down = f();
  x = keep;
  return (up - down) / (2.0 * h);
}

}  // namespace oracle
