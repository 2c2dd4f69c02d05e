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

#include "circlenet/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace circlenet {
namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << problems.size() << " validation problem(s)";
  for (const auto& p : problems) os << "\n  " << p;
  return os.str();
}

// Raised inside a record parser; converted to a line-tagged problem.
struct RecordError {
  std::string what;
};

double num(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError{std::string("missing field '") + key + "'"};
  if (!it->is_number()) throw RecordError{std::string("field '") + key + "' must be a number"};
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw RecordError{std::string("field '") + key + "' is not finite"};
  return v;
}

std::int64_t integer(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError{std::string("missing field '") + key + "'"};
  if (!it->is_number_integer()) {
    throw RecordError{std::string("field '") + key + "' must be an integer"};
  }
  return it->get<std::int64_t>();
}

std::vector<double> numbers(const json& j, const char* key, std::size_t expected) {
  auto it = j.find(key);
  if (it == j.end()) throw RecordError{std::string("missing field '") + key + "'"};
  if (!it->is_array()) throw RecordError{std::string("field '") + key + "' must be an array"};
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw RecordError{std::string("field '") + key + "' holds a non-number"};
    out.push_back(v.get<double>());
    if (!std::isfinite(out.back())) {
      throw RecordError{std::string("field '") + key + "' holds a non-finite value"};
    }
  }
  if (expected != 0 && out.size() != expected) {
    throw RecordError{std::string("field '") + key + "' must have " + std::to_string(expected) +
                      " entries"};
  }
  return out;
}

std::string type_of(const json& j) {
  auto it = j.find("type");
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

// Calls fn(line_number, json) for every non-empty line, gathering problems.
template <class Fn>
std::vector<std::string> for_each_record(std::istream& is, Fn&& fn) {
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      problems.push_back("line " + std::to_string(lineno) + ": malformed JSON");
      continue;
    }
    if (!j.is_object()) {
      problems.push_back("line " + std::to_string(lineno) + ": record must be a JSON object");
      continue;
    }
    try {
      fn(lineno, j);
    } catch (const RecordError& e) {
      problems.push_back("line " + std::to_string(lineno) + ": " + e.what);
    } catch (const std::invalid_argument& e) {
      problems.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return problems;
}

std::string fixed_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fixed6(v[i]);
  }
  return s + "]";
}

void write_grid(std::ostream& os, const char* name, const Grid& g) {
  os << "{\"type\":\"grid\",\"name\":\"" << name << "\",\"shape\":[" << g.channels() << ','
     << g.height() << ',' << g.width() << "],\"data\":[";
  const auto v = g.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << fixed6(v[i]);
  }
  os << "]}\n";
}

Grid read_grid(const json& j) {
  const auto shape = numbers(j, "shape", 3);
  const auto data = numbers(j, "data", 0);
  for (double s : shape) {
    if (s < 0 || s != std::floor(s)) throw RecordError{"grid shape must be non-negative integers"};
  }
  Grid g(static_cast<int>(shape[0]), static_cast<int>(shape[1]), static_cast<int>(shape[2]));
  if (data.size() != g.size()) throw RecordError{"grid data length does not match its shape"};
  std::copy(data.begin(), data.end(), g.values().begin());
  return g;
}

struct MapsHeader {
  std::string kind;
  std::int64_t image_id = 0;
  int stride = 0;
  int classes = 0;
  int width = 0;
  int height = 0;
};

MapsHeader read_maps_header(const json& j) {
  MapsHeader h;
  auto it = j.find("kind");
  if (it == j.end() || !it->is_string()) throw RecordError{"maps header needs a 'kind'"};
  h.kind = it->get<std::string>();
  h.image_id = integer(j, "image_id");
  h.stride = static_cast<int>(integer(j, "stride"));
  h.classes = static_cast<int>(integer(j, "classes"));
  h.width = static_cast<int>(integer(j, "width"));
  h.height = static_cast<int>(integer(j, "height"));
  if (h.stride < 1 || h.classes < 1 || h.width < 1 || h.height < 1) {
    throw RecordError{"maps header dimensions must be positive"};
  }
  return h;
}

void write_maps_header(std::ostream& os, const char* kind, std::int64_t image_id, int stride,
                       const Grid& heat) {
  os << "{\"type\":\"maps\",\"kind\":\"" << kind << "\",\"image_id\":" << image_id
     << ",\"stride\":" << stride << ",\"classes\":" << heat.channels()
     << ",\"width\":" << heat.width() << ",\"height\":" << heat.height() << "}\n";
}

void check_grid_shape(const Grid& g, int channels, const MapsHeader& h, const char* name) {
  if (g.channels() != channels || g.height() != h.height || g.width() != h.width) {
    throw RecordError{std::string("grid '") + name + "' does not match the maps header"};
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const ImageInfo* Dataset::find_image(std::int64_t id) const {
  for (const auto& im : images) {
    if (im.id == id) return &im;
  }
  return nullptr;
}

Dataset dataset_from_scenes(std::span<const Scene> scenes) {
  Dataset ds;
  std::int64_t ann_id = 1;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const Scene& s = scenes[k];
    const auto image_id = static_cast<std::int64_t>(k + 1);
    ds.images.push_back({image_id, s.image_w, s.image_h});
    for (std::size_t i = 0; i < s.circles.size(); ++i) {
      Annotation a;
      a.id = ann_id++;
      a.image_id = image_id;
      a.circle = s.circles[i];
      a.bbox = circle_to_tight_box(s.circles[i]);
      if (i < s.masks.size()) a.mask = s.masks[i];
      a.area = s.circles[i].area();
      ds.annotations.push_back(std::move(a));
    }
  }
  return ds;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  os << "{\"format\":\"circlenet-dataset\",\"version\":" << kDatasetFormatVersion << "}\n";
  for (const auto& im : ds.images) {
    os << "{\"type\":\"image\",\"id\":" << im.id << ",\"width\":" << im.width
       << ",\"height\":" << im.height << "}\n";
  }
  for (const auto& a : ds.annotations) {
    os << "{\"type\":\"annotation\",\"id\":" << a.id << ",\"image_id\":" << a.image_id
       << ",\"category_id\":" << a.circle.category << ",\"circle_center\":"
       << fixed_list({a.circle.center.x, a.circle.center.y})
       << ",\"circle_radius\":" << fixed6(a.circle.radius);
    if (a.bbox) {
      os << ",\"bbox\":" << fixed_list({a.bbox->min.x, a.bbox->min.y, a.bbox->width, a.bbox->height});
    }
    if (a.mask) {
      std::vector<double> flat;
      for (const auto& p : a.mask->vertices()) {
        flat.push_back(p.x);
        flat.push_back(p.y);
      }
      os << ",\"segmentation\":[" << fixed_list(flat) << "]";
    }
    os << ",\"area\":" << fixed6(a.area) << "}\n";
  }
}

Dataset read_dataset(std::istream& is) {
  Dataset ds;
  bool saw_header = false;
  std::set<std::int64_t> image_ids;
  std::set<std::int64_t> ann_ids;
  std::vector<std::pair<int, std::int64_t>> refs;  // (line, image_id)

  auto problems = for_each_record(is, [&](int lineno, const json& j) {
    if (!saw_header) {
      saw_header = true;
      auto f = j.find("format");
      if (f == j.end() || *f != "circlenet-dataset") {
        throw RecordError{"first record must be the circlenet-dataset header"};
      }
      if (integer(j, "version") != kDatasetFormatVersion) {
        throw RecordError{"unsupported format version"};
      }
      return;
    }
    const std::string type = type_of(j);
    if (type == "image") {
      ImageInfo im;
      im.id = integer(j, "id");
      im.width = static_cast<int>(integer(j, "width"));
      im.height = static_cast<int>(integer(j, "height"));
      if (im.width < 1 || im.height < 1) throw RecordError{"image dimensions must be positive"};
      if (!image_ids.insert(im.id).second) {
        throw RecordError{"duplicate image id " + std::to_string(im.id)};
      }
      ds.images.push_back(im);
    } else if (type == "annotation") {
      Annotation a;
      a.id = integer(j, "id");
      a.image_id = integer(j, "image_id");
      a.circle.category = static_cast<int>(integer(j, "category_id"));
      const auto c = numbers(j, "circle_center", 2);
      a.circle.center = {c[0], c[1]};
      a.circle.radius = num(j, "circle_radius");
      if (a.circle.radius < 0.0) throw RecordError{"circle_radius must be >= 0"};
      if (j.contains("bbox")) {
        const auto b = numbers(j, "bbox", 4);
        if (b[2] < 0.0 || b[3] < 0.0) throw RecordError{"bbox extents must be >= 0"};
        a.bbox = Box{{b[0], b[1]}, b[2], b[3], 1.0, a.circle.category};
      }
      if (j.contains("segmentation")) {
        const auto& seg = j.at("segmentation");
        if (!seg.is_array() || seg.size() != 1 || !seg[0].is_array()) {
          throw RecordError{"segmentation must hold exactly one polygon"};
        }
        json wrapped = {{"poly", seg[0]}};
        const auto flat = numbers(wrapped, "poly", 0);
        if (flat.size() % 2 != 0) throw RecordError{"segmentation needs x,y pairs"};
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < flat.size(); i += 2) pts.push_back({flat[i], flat[i + 1]});
        a.mask = PolygonMask(std::move(pts));
      }
      a.area = num(j, "area");
      const double expect = a.circle.area();
      if (std::abs(a.area - expect) > 0.01 * std::max(expect, 1e-12) && !(expect == 0.0 && a.area == 0.0)) {
        throw RecordError{"area disagrees with the circle by more than 1%"};
      }
      if (!ann_ids.insert(a.id).second) {
        throw RecordError{"duplicate annotation id " + std::to_string(a.id)};
      }
      refs.emplace_back(lineno, a.image_id);
      ds.annotations.push_back(std::move(a));
    } else {
      throw RecordError{"unknown record type '" + type + "'"};
    }
  });
  if (!saw_header) problems.emplace_back("line 1: missing circlenet-dataset header");
  for (const auto& [lineno, image_id] : refs) {
    if (!image_ids.count(image_id)) {
      problems.push_back("line " + std::to_string(lineno) + ": annotation references unknown image " +
                         std::to_string(image_id));
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return ds;
}

void write_predictions(std::ostream& os, const std::vector<Prediction>& preds) {
  for (const auto& p : preds) {
    os << "{\"image_id\":" << p.image_id << ",\"category_id\":" << p.circle.category
       << ",\"circle_center\":" << fixed_list({p.circle.center.x, p.circle.center.y})
       << ",\"circle_radius\":" << fixed6(p.circle.radius) << ",\"score\":" << fixed6(p.circle.score)
       << "}\n";
  }
}

std::vector<Prediction> read_predictions(std::istream& is) {
  std::vector<Prediction> out;
  auto problems = for_each_record(is, [&](int, const json& j) {
    Prediction p;
    p.image_id = integer(j, "image_id");
    p.circle.category = static_cast<int>(integer(j, "category_id"));
    const auto c = numbers(j, "circle_center", 2);
    p.circle.center = {c[0], c[1]};
    p.circle.radius = num(j, "circle_radius");
    if (p.circle.radius < 0.0) throw RecordError{"circle_radius must be >= 0"};
    p.circle.score = num(j, "score");
    if (!(p.circle.score >= 0.0 && p.circle.score <= 1.0)) {
      throw RecordError{"score must be in [0, 1]"};
    }
    out.push_back(p);
  });
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

void cross_validate(const Dataset& gt, const std::vector<Prediction>& preds) {
  std::set<std::int64_t> ids;
  for (const auto& im : gt.images) ids.insert(im.id);
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!ids.count(preds[i].image_id)) {
      problems.push_back("prediction " + std::to_string(i + 1) + ": unknown image " +
                         std::to_string(preds[i].image_id));
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::vector<ImageRecords> group_by_image(const Dataset& gt, const std::vector<Prediction>& preds) {
  std::vector<ImageRecords> out;
  std::map<std::int64_t, std::size_t> slot;
  for (const auto& im : gt.images) {
    slot[im.id] = out.size();
    ImageRecords r;
    r.image_id = im.id;
    r.width = im.width;
    r.height = im.height;
    out.push_back(std::move(r));
  }
  for (const auto& a : gt.annotations) {
    auto it = slot.find(a.image_id);
    if (it != slot.end()) out[it->second].gts.push_back(a.circle);
  }
  for (const auto& p : preds) {
    auto it = slot.find(p.image_id);
    if (it != slot.end()) out[it->second].preds.push_back(p.circle);
  }
  return out;
}

void write_targets(std::ostream& os, const std::vector<TargetsBlock>& blocks) {
  for (const auto& b : blocks) {
    const HeatmapTargets& t = b.targets;
    write_maps_header(os, "targets", b.image_id, t.stride, t.heatmap);
    write_grid(os, "heatmap", t.heatmap);
    write_grid(os, "radius", t.radius_map);
    write_grid(os, "offset", t.offset_map);
    for (const auto& k : t.keypoints) {
      os << "{\"type\":\"keypoint\",\"category_id\":" << k.category << ",\"cell\":[" << k.cell_x
         << ',' << k.cell_y << "],\"offset\":" << fixed_list({k.offset_x, k.offset_y})
         << ",\"radius\":" << fixed6(k.radius) << "}\n";
    }
  }
}

std::vector<TargetsBlock> read_targets(std::istream& is) {
  std::vector<TargetsBlock> out;
  MapsHeader header;
  auto problems = for_each_record(is, [&](int, const json& j) {
    const std::string type = type_of(j);
    if (type == "maps") {
      header = read_maps_header(j);
      if (header.kind != "targets") throw RecordError{"expected a targets block"};
      TargetsBlock b;
      b.image_id = header.image_id;
      b.targets.stride = header.stride;
      b.targets.heatmap = Grid(header.classes, header.height, header.width);
      b.targets.radius_map = Grid(1, header.height, header.width);
      b.targets.offset_map = Grid(2, header.height, header.width);
      out.push_back(std::move(b));
      return;
    }
    if (out.empty()) throw RecordError{"record before the first maps header"};
    HeatmapTargets& t = out.back().targets;
    if (type == "grid") {
      const std::string name = j.value("name", "");
      Grid g = read_grid(j);
      if (name == "heatmap") {
        check_grid_shape(g, header.classes, header, "heatmap");
        t.heatmap = std::move(g);
      } else if (name == "radius") {
        check_grid_shape(g, 1, header, "radius");
        t.radius_map = std::move(g);
      } else if (name == "offset") {
        check_grid_shape(g, 2, header, "offset");
        t.offset_map = std::move(g);
      } else {
        throw RecordError{"unknown grid '" + name + "' in a targets block"};
      }
    } else if (type == "keypoint") {
      Keypoint k;
      k.category = static_cast<int>(integer(j, "category_id"));
      const auto cell = numbers(j, "cell", 2);
      k.cell_x = static_cast<int>(cell[0]);
      k.cell_y = static_cast<int>(cell[1]);
      const auto off = numbers(j, "offset", 2);
      k.offset_x = off[0];
      k.offset_y = off[1];
      k.radius = num(j, "radius");
      if (!t.heatmap.contains(k.cell_y, k.cell_x) || k.category < 0 ||
          k.category >= header.classes) {
        throw RecordError{"keypoint outside the grid"};
      }
      t.keypoints.push_back(k);
    } else {
      throw RecordError{"unknown record type '" + type + "'"};
    }
  });
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

void write_outputs(std::ostream& os, const std::vector<OutputsBlock>& blocks) {
  for (const auto& b : blocks) {
    write_maps_header(os, "outputs", b.image_id, b.stride, b.maps.heatmap_logits);
    write_grid(os, "heatmap_logits", b.maps.heatmap_logits);
    write_grid(os, "radius", b.maps.radius);
    write_grid(os, "offset", b.maps.offset);
  }
}

std::vector<OutputsBlock> read_outputs(std::istream& is) {
  std::vector<OutputsBlock> out;
  MapsHeader header;
  auto problems = for_each_record(is, [&](int, const json& j) {
    const std::string type = type_of(j);
    if (type == "maps") {
      header = read_maps_header(j);
      if (header.kind != "outputs") throw RecordError{"expected an outputs block"};
      OutputsBlock b;
      b.image_id = header.image_id;
      b.stride = header.stride;
      b.maps = OutputMaps(header.classes, header.height, header.width);
      out.push_back(std::move(b));
      return;
    }
    if (out.empty()) throw RecordError{"record before the first maps header"};
    OutputMaps& m = out.back().maps;
    if (type != "grid") throw RecordError{"unknown record type '" + type + "'"};
    const std::string name = j.value("name", "");
    Grid g = read_grid(j);
    if (name == "heatmap_logits") {
      check_grid_shape(g, header.classes, header, "heatmap_logits");
      m.heatmap_logits = std::move(g);
    } else if (name == "radius") {
      check_grid_shape(g, 1, header, "radius");
      m.radius = std::move(g);
    } else if (name == "offset") {
      check_grid_shape(g, 2, header, "offset");
      m.offset = std::move(g);
    } else {
      throw RecordError{"unknown grid '" + name + "' in an outputs block"};
    }
  });
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

}  // namespace circlenet
