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
#include <span>
#include <vector>

namespace circlenet {

inline constexpr double kPi = 3.14159265358979323846;

/// Continuous image coordinate. Origin at the top-left corner, x grows to the
/// right and y grows downward.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Circle {
  Point2 center;
  double radius = 0.0;
  double score = 1.0;
  int category = 0;

  double area() const { return kPi * radius * radius; }
};

/// Axis-aligned rectangle given by its minimum (top-left) corner and extents.
struct Box {
  Point2 min;
  double width = 0.0;
  double height = 0.0;
  double score = 1.0;
  int category = 0;

  double area() const { return width * height; }
  Point2 center() const { return {min.x + 0.5 * width, min.y + 0.5 * height}; }
};

/// Simple polygon. The constructor rejects fewer than three vertices and
/// self-intersecting outlines.
class PolygonMask {
 public:
  explicit PolygonMask(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }

 private:
  std::vector<Point2> vertices_;
};

/// Builds the regular polygon with `sides` vertices inscribed in `c`.
PolygonMask inscribed_polygon(const Circle& c, int sides);

/// Area of the intersection of two discs. Handles the disjoint, containment
/// and partial-overlap regimes.
double circle_intersection_area(const Circle& a, const Circle& b);

/// Circle intersection-over-union. Symmetric in its arguments bit for bit.
/// Returns 0 when both discs have zero area. Throws std::invalid_argument on
/// non-finite input or a negative radius.
double ciou(const Circle& a, const Circle& b);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t union_hits = 0;
};

/// Hit-ratio estimate of ciou(a, b) from `samples` uniform points over the
/// bounding rectangle of the two discs. The standard error is the binomial
/// error of the intersection fraction among points landing in the union.
MonteCarloEstimate ciou_monte_carlo(const Circle& a, const Circle& b,
                                    std::uint64_t samples, std::uint64_t seed);

double box_iou(const Box& a, const Box& b);

/// Square of side 2r centred on the circle.
Box circle_to_tight_box(const Circle& c);

/// Largest circle inscribed in the box, centred on the box centre.
Circle inscribed_circle(const Box& b);

/// Rotates a shape counterclockwise by `turns` quarter turns. A point (x, y)
/// of a W x H image maps to (y, W - x) of the H x W image per turn.
/// `image_w` and `image_h` describe the image the shape currently lives in.
Circle rotate90(const Circle& c, double image_w, double image_h, int turns);
Box rotate90(const Box& b, double image_w, double image_h, int turns);
Point2 rotate90(const Point2& p, double image_w, double image_h, int turns);

/// Undoes rotate90(shape, image_w, image_h, turns), where `image_w` and
/// `image_h` are the dimensions of the original (unrotated) image.
Circle unrotate90(const Circle& c, double image_w, double image_h, int turns);
Box unrotate90(const Box& b, double image_w, double image_h, int turns);

/// Absolute shoelace area.
double polygon_area(const PolygonMask& m);
double polygon_area(std::span<const Point2> vertices);

/// Greedy suppression in descending score order; ties prefer the smaller
/// centre x, then y. Every surviving pair has ciou below `threshold`.
std::vector<Circle> circle_nms(std::span<const Circle> dets, double threshold);

/// Score-descending order used throughout the library: ties broken by
/// smaller centre x, then smaller centre y.
bool score_order(const Circle& a, const Circle& b);

}  // namespace circlenet
