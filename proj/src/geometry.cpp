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

#include "circlenet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "circlenet/random.hpp"

namespace circlenet {
namespace {

void require_finite(const Circle& c, const char* what) {
  if (!std::isfinite(c.center.x) || !std::isfinite(c.center.y) || !std::isfinite(c.radius)) {
    throw std::invalid_argument(std::string(what) + ": non-finite circle");
  }
  if (c.radius < 0.0) throw std::invalid_argument(std::string(what) + ": negative radius");
}

void require_finite(const Box& b, const char* what) {
  if (!std::isfinite(b.min.x) || !std::isfinite(b.min.y) || !std::isfinite(b.width) ||
      !std::isfinite(b.height)) {
    throw std::invalid_argument(std::string(what) + ": non-finite box");
  }
  if (b.width < 0.0 || b.height < 0.0) {
    throw std::invalid_argument(std::string(what) + ": negative box extent");
  }
}

void require_turns(int turns) {
  if (turns < 0 || turns > 3) {
    throw std::invalid_argument("rotate90: turns must be in {0, 1, 2, 3}, got " +
                                std::to_string(turns));
  }
}

void require_inside(const Point2& p, double w, double h) {
  if (!(p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h)) {
    throw std::invalid_argument("rotate90: shape lies outside the image");
  }
}

// Area of the part of a disc of radius r cut off by a chord at signed
// distance x from the centre (x > 0: the minor side); gap = r - x, passed
// separately because it is computed without cancellation near tangency.
double segment_area(double r, double x, double gap) {
  const double h = std::sqrt(std::max(0.0, gap * (2.0 * r - gap)));
  return r * r * std::atan2(h, x) - x * h;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

Point2 rotate_once(const Point2& p, double w) { return {p.y, w - p.x}; }

}  // namespace

PolygonMask::PolygonMask(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw std::invalid_argument("PolygonMask: needs at least 3 vertices");
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw std::invalid_argument("PolygonMask: non-finite vertex");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a1 = vertices_[i];
    const Point2& a2 = vertices_[(i + 1) % n];
    if (a1 == a2) throw std::invalid_argument("PolygonMask: repeated consecutive vertex");
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_touch(a1, a2, vertices_[j], vertices_[(j + 1) % n])) {
        throw std::invalid_argument("PolygonMask: self-intersecting outline (edges " +
                                    std::to_string(i) + " and " + std::to_string(j) + ")");
      }
    }
  }
}

PolygonMask inscribed_polygon(const Circle& c, int sides) {
  if (sides < 3) throw std::invalid_argument("inscribed_polygon: sides must be >= 3");
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    const double t = 2.0 * kPi * k / sides;
    v.push_back({c.center.x + c.radius * std::cos(t), c.center.y + c.radius * std::sin(t)});
  }
  return PolygonMask(std::move(v));
}

double circle_intersection_area(const Circle& a, const Circle& b) {
  require_finite(a, "circle_intersection_area");
  require_finite(b, "circle_intersection_area");
  const double ra = a.radius;
  const double rb = b.radius;
  if (ra == 0.0 || rb == 0.0) return 0.0;
  const double d = std::hypot(b.center.x - a.center.x, b.center.y - a.center.y);
  if (d >= ra + rb) return 0.0;
  if (d <= std::abs(ra - rb)) {
    const double r = std::min(ra, rb);
    return kPi * r * r;
  }
  // Signed distances from each centre to the common chord.
  const double xa = (d * d + ra * ra - rb * rb) / (2.0 * d);
  const double xb = d - xa;
  const double s = ra + rb - d;
  const double gap_a = s * (rb - ra + d) / (2.0 * d);
  const double gap_b = s * (ra - rb + d) / (2.0 * d);
  return segment_area(ra, xa, gap_a) + segment_area(rb, xb, gap_b);
}

double ciou(const Circle& a, const Circle& b) {
  require_finite(a, "ciou");
  require_finite(b, "ciou");
  const Circle* p = &a;
  const Circle* q = &b;
  if (std::tie(q->radius, q->center.x, q->center.y) <
      std::tie(p->radius, p->center.x, p->center.y)) {
    std::swap(p, q);
  }
  const double inter = circle_intersection_area(*p, *q);
  const double uni = p->area() + q->area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

MonteCarloEstimate ciou_monte_carlo(const Circle& a, const Circle& b, std::uint64_t samples,
                                    std::uint64_t seed) {
  require_finite(a, "ciou_monte_carlo");
  require_finite(b, "ciou_monte_carlo");
  if (samples < 1) throw std::invalid_argument("ciou_monte_carlo: samples must be >= 1");
  if (a.radius == 0.0 && b.radius == 0.0) return {};

  const double x0 = std::min(a.center.x - a.radius, b.center.x - b.radius);
  const double x1 = std::max(a.center.x + a.radius, b.center.x + b.radius);
  const double y0 = std::min(a.center.y - a.radius, b.center.y - b.radius);
  const double y1 = std::max(a.center.y + a.radius, b.center.y + b.radius);
  const double ra2 = a.radius * a.radius;
  const double rb2 = b.radius * b.radius;

  Rng rng(seed);
  std::uint64_t in_union = 0;
  std::uint64_t in_both = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double x = rng.uniform(x0, x1);
    const double y = rng.uniform(y0, y1);
    const double dax = x - a.center.x, day = y - a.center.y;
    const double dbx = x - b.center.x, dby = y - b.center.y;
    const bool in_a = dax * dax + day * day <= ra2;
    const bool in_b = dbx * dbx + dby * dby <= rb2;
    in_union += (in_a || in_b) ? 1 : 0;
    in_both += (in_a && in_b) ? 1 : 0;
  }

  MonteCarloEstimate out;
  out.union_hits = in_union;
  if (in_union == 0) {
    out.std_error = 1.0;
    return out;
  }
  const double n = static_cast<double>(in_union);
  out.value = static_cast<double>(in_both) / n;
  out.std_error = std::sqrt(out.value * (1.0 - out.value) / n);
  return out;
}

double box_iou(const Box& a, const Box& b) {
  require_finite(a, "box_iou");
  require_finite(b, "box_iou");
  const double iw = std::min(a.min.x + a.width, b.min.x + b.width) - std::max(a.min.x, b.min.x);
  const double ih = std::min(a.min.y + a.height, b.min.y + b.height) - std::max(a.min.y, b.min.y);
  const double inter = std::max(0.0, iw) * std::max(0.0, ih);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box circle_to_tight_box(const Circle& c) {
  return Box{{c.center.x - c.radius, c.center.y - c.radius},
             2.0 * c.radius,
             2.0 * c.radius,
             c.score,
             c.category};
}

Circle inscribed_circle(const Box& b) {
  return Circle{b.center(), 0.5 * std::min(b.width, b.height), b.score, b.category};
}

Point2 rotate90(const Point2& p, double image_w, double image_h, int turns) {
  require_turns(turns);
  require_inside(p, image_w, image_h);
  Point2 q = p;
  double w = image_w, h = image_h;
  for (int t = 0; t < turns; ++t) {
    q = rotate_once(q, w);
    std::swap(w, h);
  }
  return q;
}

Circle rotate90(const Circle& c, double image_w, double image_h, int turns) {
  Circle out = c;
  out.center = rotate90(c.center, image_w, image_h, turns);
  return out;
}

Box rotate90(const Box& b, double image_w, double image_h, int turns) {
  require_turns(turns);
  require_inside(b.center(), image_w, image_h);
  Box out = b;
  double w = image_w, h = image_h;
  for (int t = 0; t < turns; ++t) {
    // The old right edge becomes the new top edge.
    out.min = Point2{out.min.y, w - (out.min.x + out.width)};
    std::swap(out.width, out.height);
    std::swap(w, h);
  }
  return out;
}

Circle unrotate90(const Circle& c, double image_w, double image_h, int turns) {
  require_turns(turns);
  const bool odd = (turns % 2) == 1;
  return rotate90(c, odd ? image_h : image_w, odd ? image_w : image_h, (4 - turns) % 4);
}

Box unrotate90(const Box& b, double image_w, double image_h, int turns) {
  require_turns(turns);
  const bool odd = (turns % 2) == 1;
  return rotate90(b, odd ? image_h : image_w, odd ? image_w : image_h, (4 - turns) % 4);
}

double polygon_area(std::span<const Point2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw std::invalid_argument("polygon_area: needs at least 3 vertices");
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = vertices[i];
    const Point2& q = vertices[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(twice);
}

double polygon_area(const PolygonMask& m) { return polygon_area(std::span(m.vertices())); }

bool score_order(const Circle& a, const Circle& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.center.x != b.center.x) return a.center.x < b.center.x;
  return a.center.y < b.center.y;
}

std::vector<Circle> circle_nms(std::span<const Circle> dets, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("circle_nms: threshold must be in [0, 1]");
  }
  std::vector<Circle> sorted(dets.begin(), dets.end());
  std::stable_sort(sorted.begin(), sorted.end(), score_order);
  std::vector<Circle> kept;
  for (const Circle& c : sorted) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](const Circle& k) { return ciou(k, c) >= threshold; });
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

}  // namespace circlenet
