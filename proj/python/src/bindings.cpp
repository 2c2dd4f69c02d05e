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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "circlenet/decode.hpp"
#include "circlenet/encode.hpp"
#include "circlenet/eval.hpp"
#include "circlenet/geometry.hpp"
#include "circlenet/losses.hpp"
#include "circlenet/reftrainer.hpp"
#include "circlenet/synth.hpp"

namespace py = pybind11;
using namespace circlenet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Grid& g) {
  Array out({g.channels(), g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

Grid from_numpy(const Array& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected a (channels, height, width) array");
  Grid g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), g.values().begin());
  return g;
}

Array points_to_numpy(const std::vector<Point2>& pts) {
  Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    v(i, 0) = pts[i].x;
    v(i, 1) = pts[i].y;
  }
  return out;
}

std::vector<Point2> points_from_numpy(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw std::invalid_argument("expected an (n, 2) vertex array");
  std::vector<Point2> pts;
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts.push_back({v(i, 0), v(i, 1)});
  return pts;
}

OverlapMetric parse_metric(const std::string& s) {
  if (s == "ciou") return OverlapMetric::kCiou;
  if (s == "box") return OverlapMetric::kBoxIou;
  throw std::invalid_argument("metric must be 'ciou' or 'box', got '" + s + "'");
}

SigmaPolicy sigma_policy(std::optional<double> sigma, double min_overlap) {
  return sigma ? SigmaPolicy::fixed(*sigma) : SigmaPolicy::size_adaptive(min_overlap);
}

std::string circle_repr(const Circle& c) {
  std::ostringstream os;
  os << "Circle(x=" << c.center.x << ", y=" << c.center.y << ", radius=" << c.radius << ", score=" << c.score
     << ", category=" << c.category << ")";
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Circle-representation detection: geometry, heatmap targets, losses, decoding and evaluation.";

  py::register_exception<EncodeError>(m, "EncodeError", PyExc_ValueError);
  py::register_exception<FitDivergence>(m, "FitDivergence", PyExc_RuntimeError);

  // ---------------------------------------------------------------- geometry
  py::class_<Circle>(m, "Circle")
      .def(py::init([](double x, double y, double radius, double score, int category) {
             Circle c;
             c.center = {x, y};
             c.radius = radius;
             c.score = score;
             c.category = category;
             return c;
           }),
           py::arg("x"), py::arg("y"), py::arg("radius"), py::arg("score") = 1.0, py::arg("category") = 0)
      .def_property(
          "x", [](const Circle& c) { return c.center.x; }, [](Circle& c, double v) { c.center.x = v; })
      .def_property(
          "y", [](const Circle& c) { return c.center.y; }, [](Circle& c, double v) { c.center.y = v; })
      .def_readwrite("radius", &Circle::radius)
      .def_readwrite("score", &Circle::score)
      .def_readwrite("category", &Circle::category)
      .def_property_readonly("area", &Circle::area)
      .def("__repr__", &circle_repr);

  py::class_<Box>(m, "Box")
      .def(py::init([](double x, double y, double w, double h, double score, int category) {
             Box b;
             b.min = {x, y};
             b.width = w;
             b.height = h;
             b.score = score;
             b.category = category;
             return b;
           }),
           py::arg("x"), py::arg("y"), py::arg("width"), py::arg("height"), py::arg("score") = 1.0,
           py::arg("category") = 0)
      .def_property_readonly("x", [](const Box& b) { return b.min.x; })
      .def_property_readonly("y", [](const Box& b) { return b.min.y; })
      .def_readwrite("width", &Box::width)
      .def_readwrite("height", &Box::height)
      .def_readwrite("score", &Box::score)
      .def_readwrite("category", &Box::category)
      .def_property_readonly("area", &Box::area);

  m.def("ciou", &ciou, py::arg("a"), py::arg("b"), "Intersection over union of two discs.");
  m.def("circle_intersection_area", &circle_intersection_area, py::arg("a"), py::arg("b"));
  m.def("box_iou", &box_iou, py::arg("a"), py::arg("b"));
  m.def(
      "ciou_monte_carlo",
      [](const Circle& a, const Circle& b, std::uint64_t samples, std::uint64_t seed) {
        const auto e = ciou_monte_carlo(a, b, samples, seed);
        return py::make_tuple(e.value, e.std_error);
      },
      py::arg("a"), py::arg("b"), py::arg("samples") = 1000000, py::arg("seed") = 0,
      "Monte-Carlo estimate of ciou; returns (value, standard_error).");
  m.def("circle_to_tight_box", &circle_to_tight_box, py::arg("circle"));
  m.def("inscribed_circle", &inscribed_circle, py::arg("box"));
  m.def(
      "rotate90", [](const Circle& c, double w, double h, int turns) { return rotate90(c, w, h, turns); },
      py::arg("circle"), py::arg("image_w"), py::arg("image_h"), py::arg("turns"));
  m.def(
      "unrotate90", [](const Circle& c, double w, double h, int turns) { return unrotate90(c, w, h, turns); },
      py::arg("circle"), py::arg("image_w"), py::arg("image_h"), py::arg("turns"));
  m.def(
      "inscribed_polygon", [](const Circle& c, int sides) { return points_to_numpy(inscribed_polygon(c, sides).vertices()); },
      py::arg("circle"), py::arg("sides"));
  m.def(
      "polygon_area", [](const Array& v) { return polygon_area(PolygonMask(points_from_numpy(v))); },
      py::arg("vertices"));
  m.def(
      "circle_nms", [](const std::vector<Circle>& d, double t) { return circle_nms(d, t); }, py::arg("detections"),
      py::arg("threshold"));

  // ---------------------------------------------------------------- encode
  py::class_<HeatmapTargets>(m, "HeatmapTargets")
      .def_readonly("stride", &HeatmapTargets::stride)
      .def_property_readonly("heatmap", [](const HeatmapTargets& t) { return to_numpy(t.heatmap); })
      .def_property_readonly("radius_map", [](const HeatmapTargets& t) { return to_numpy(t.radius_map); })
      .def_property_readonly("offset_map", [](const HeatmapTargets& t) { return to_numpy(t.offset_map); })
      .def_property_readonly("keypoints",
                             [](const HeatmapTargets& t) {
                               py::list out;
                               for (const auto& k : t.keypoints) {
                                 py::dict d;
                                 d["category"] = k.category;
                                 d["cell_x"] = k.cell_x;
                                 d["cell_y"] = k.cell_y;
                                 d["offset_x"] = k.offset_x;
                                 d["offset_y"] = k.offset_y;
                                 d["radius"] = k.radius;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("circles", &HeatmapTargets::circles);

  m.def(
      "encode",
      [](const std::vector<Circle>& gt, int input_w, int input_h, int stride, int num_classes,
         std::optional<double> sigma, double min_overlap) {
        EncoderConfig cfg;
        cfg.input_w = input_w;
        cfg.input_h = input_h;
        cfg.stride = stride;
        cfg.num_classes = num_classes;
        cfg.sigma = sigma_policy(sigma, min_overlap);
        return encode(gt, cfg);
      },
      py::arg("circles"), py::kw_only(), py::arg("input_w") = 512, py::arg("input_h") = 512, py::arg("stride") = 4,
      py::arg("num_classes") = 1, py::arg("sigma") = py::none(), py::arg("min_overlap") = 0.7,
      "Encode ground-truth circles into heatmap, radius and offset targets. A fixed `sigma` overrides the "
      "size-adaptive policy.");
  m.def("gaussian_sigma", [](double r, std::optional<double> sigma, double min_overlap) {
    return gaussian_sigma(r, sigma_policy(sigma, min_overlap));
  }, py::arg("radius_out"), py::kw_only(), py::arg("sigma") = py::none(), py::arg("min_overlap") = 0.7);

  // ---------------------------------------------------------------- losses
  py::class_<OutputMaps>(m, "OutputMaps")
      .def(py::init<int, int, int>(), py::arg("classes"), py::arg("height"), py::arg("width"))
      .def_property(
          "heatmap_logits", [](const OutputMaps& o) { return to_numpy(o.heatmap_logits); },
          [](OutputMaps& o, const Array& a) { o.heatmap_logits = from_numpy(a); })
      .def_property(
          "radius", [](const OutputMaps& o) { return to_numpy(o.radius); },
          [](OutputMaps& o, const Array& a) { o.radius = from_numpy(a); })
      .def_property(
          "offset", [](const OutputMaps& o) { return to_numpy(o.offset); },
          [](OutputMaps& o, const Array& a) { o.offset = from_numpy(a); });

  m.def("perfect_maps", &perfect_maps, py::arg("targets"));
  m.def("optimal_maps", &optimal_maps, py::arg("targets"));
  m.def(
      "focal_loss",
      [](const Array& logits, const Array& target, double alpha, double beta) {
        const auto t = focal_loss(from_numpy(logits), from_numpy(target), alpha, beta);
        return py::make_tuple(t.value, to_numpy(t.grad));
      },
      py::arg("logits"), py::arg("target"), py::arg("alpha") = 2.0, py::arg("beta") = 4.0,
      "Penalty-reduced focal loss; returns (value, gradient w.r.t. logits).");
  m.def(
      "radius_loss",
      [](const Array& radius, const HeatmapTargets& t) {
        const auto r = radius_loss(from_numpy(radius), t.keypoints);
        return py::make_tuple(r.value, to_numpy(r.grad));
      },
      py::arg("radius"), py::arg("targets"));
  m.def(
      "offset_loss",
      [](const Array& offset, const HeatmapTargets& t) {
        const auto r = offset_loss(from_numpy(offset), t.keypoints);
        return py::make_tuple(r.value, to_numpy(r.grad));
      },
      py::arg("offset"), py::arg("targets"));
  m.def(
      "total_loss",
      [](const OutputMaps& maps, const HeatmapTargets& t, double lambda_radius, double lambda_off, double alpha,
         double beta) {
        const auto r = total_loss(maps, t, LossWeights{lambda_radius, lambda_off, alpha, beta});
        py::dict d;
        d["focal"] = r.focal;
        d["offset"] = r.offset;
        d["radius"] = r.radius;
        d["total"] = r.total;
        d["grad"] = r.grad;
        return d;
      },
      py::arg("maps"), py::arg("targets"), py::kw_only(), py::arg("lambda_radius") = 0.1, py::arg("lambda_off") = 1.0,
      py::arg("alpha") = 2.0, py::arg("beta") = 4.0);

  // ---------------------------------------------------------------- decode
  m.def(
      "decode",
      [](const OutputMaps& maps, int top_n, double score_threshold, int stride, bool nms, double nms_threshold) {
        DecodeConfig cfg;
        cfg.top_n = top_n;
        cfg.score_threshold = score_threshold;
        cfg.stride = stride;
        cfg.apply_nms = nms;
        cfg.nms_threshold = nms_threshold;
        return decode_circles(maps, cfg);
      },
      py::arg("maps"), py::kw_only(), py::arg("top_n") = 100, py::arg("score_threshold") = 0.0,
      py::arg("stride") = 4, py::arg("nms") = false, py::arg("nms_threshold") = 0.5);
  m.def("rotate_maps", &rotate_maps, py::arg("maps"), py::arg("turns"));

  // ---------------------------------------------------------------- eval
  py::class_<ImageRecords>(m, "ImageRecords")
      .def(py::init([](std::int64_t id, double w, double h, std::vector<Circle> gts, std::vector<Circle> preds) {
             ImageRecords r;
             r.image_id = id;
             r.width = w;
             r.height = h;
             r.gts = std::move(gts);
             r.preds = std::move(preds);
             return r;
           }),
           py::arg("image_id"), py::arg("width"), py::arg("height"), py::arg("gts"), py::arg("preds"))
      .def_readwrite("image_id", &ImageRecords::image_id)
      .def_readwrite("gts", &ImageRecords::gts)
      .def_readwrite("preds", &ImageRecords::preds);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("ap", &EvalReport::ap)
      .def_readonly("ap50", &EvalReport::ap50)
      .def_readonly("ap75", &EvalReport::ap75)
      .def_readonly("ap_small", &EvalReport::ap_small)
      .def_readonly("ap_medium", &EvalReport::ap_medium)
      .def_readonly("thresholds", &EvalReport::thresholds)
      .def_readonly("per_threshold_ap", &EvalReport::per_threshold_ap)
      .def_property_readonly("froc", [](const EvalReport& r) {
        py::list out;
        for (const auto& p : r.froc) out.append(py::make_tuple(p.score, p.fp_per_image, p.sensitivity));
        return out;
      });

  m.def(
      "evaluate",
      [](const std::vector<ImageRecords>& images, const std::string& metric, std::optional<std::vector<double>> th) {
        MatchConfig cfg;
        cfg.metric = parse_metric(metric);
        if (th) cfg.thresholds = *th;
        return evaluate(images, cfg);
      },
      py::arg("images"), py::kw_only(), py::arg("metric") = "ciou", py::arg("thresholds") = py::none());
  m.def(
      "match_detections",
      [](const std::vector<Circle>& preds, const std::vector<Circle>& gts, const std::string& metric, double t) {
        const auto mt = match_detections(preds, gts, parse_metric(metric), t);
        return py::make_tuple(mt.true_positives, mt.false_positives, mt.false_negatives);
      },
      py::arg("preds"), py::arg("gts"), py::kw_only(), py::arg("metric") = "ciou", py::arg("threshold") = 0.5,
      "Greedy matching; returns (true_positives as (pred, gt) pairs, false_positives, false_negatives).");
  m.def(
      "froc",
      [](const std::vector<ImageRecords>& images, const std::string& metric, double t) {
        py::list out;
        for (const auto& p : froc(images, parse_metric(metric), t)) {
          out.append(py::make_tuple(p.score, p.fp_per_image, p.sensitivity));
        }
        return out;
      },
      py::arg("images"), py::kw_only(), py::arg("metric") = "ciou", py::arg("threshold") = 0.5,
      "FROC operating points as (score, fp_per_image, sensitivity).");
  m.def(
      "rotation_consistency",
      [](const std::vector<Circle>& a, const std::vector<Circle>& b, const std::string& metric) {
        return rotation_consistency(a, b, parse_metric(metric));
      },
      py::arg("a"), py::arg("b"), py::kw_only(), py::arg("metric") = "ciou");
  m.def(
      "mask_detection_ratio",
      [](const std::vector<Array>& masks, const std::vector<Circle>& dets) {
        std::vector<PolygonMask> polys;
        for (const auto& a : masks) polys.emplace_back(points_from_numpy(a));
        const auto r = mask_detection_ratio(polys, dets);
        return py::make_tuple(r.mean, r.skipped, r.ratios);
      },
      py::arg("masks"), py::arg("detections"), "Returns (mean, skipped, per-object ratios or None).");
  m.def(
      "displacement_study",
      [](double radius, const std::vector<double>& d, int trials, std::uint64_t seed, const std::string& mode) {
        DisplacementMode dm;
        if (mode == "isotropic") {
          dm = DisplacementMode::kIsotropic;
        } else if (mode == "axial") {
          dm = DisplacementMode::kAxial;
        } else {
          throw std::invalid_argument("mode must be 'isotropic' or 'axial'");
        }
        Circle shape;
        shape.center = {0.0, 0.0};
        shape.radius = radius;
        const auto rows = displacement_study(shape, d, trials, seed, dm);
        Array out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < rows.size(); ++i) {
          v(i, 0) = rows[i].displacement;
          v(i, 1) = rows[i].box_iou;
          v(i, 2) = rows[i].ciou;
        }
        return out;
      },
      py::arg("radius"), py::arg("displacements"), py::kw_only(), py::arg("trials") = 1000, py::arg("seed") = 0,
      py::arg("mode") = "isotropic", "Rows of (displacement, mean box IoU, mean ciou).");

  // ---------------------------------------------------------------- synth
  py::class_<Scene>(m, "Scene")
      .def_readonly("image_w", &Scene::image_w)
      .def_readonly("image_h", &Scene::image_h)
      .def_readonly("circles", &Scene::circles)
      .def_property_readonly("masks", [](const Scene& s) {
        py::list out;
        for (const auto& mk : s.masks) out.append(points_to_numpy(mk.vertices()));
        return out;
      });

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int image_w, int image_h, int min_objects, int max_objects, double min_radius,
         double max_radius, double max_pairwise_ciou, int classes) {
        SceneConfig cfg;
        cfg.seed = seed;
        cfg.image_w = image_w;
        cfg.image_h = image_h;
        cfg.min_objects = min_objects;
        cfg.max_objects = max_objects;
        cfg.min_radius = min_radius;
        cfg.max_radius = max_radius;
        cfg.max_pairwise_ciou = max_pairwise_ciou;
        cfg.classes = classes;
        return generate_scene(cfg);
      },
      py::arg("seed"), py::kw_only(), py::arg("image_w") = 512, py::arg("image_h") = 512, py::arg("min_objects") = 1,
      py::arg("max_objects") = 8, py::arg("min_radius") = 8.0, py::arg("max_radius") = 40.0,
      py::arg("max_pairwise_ciou") = 0.0, py::arg("classes") = 1);
  m.def(
      "perturb_detections",
      [](const std::vector<Circle>& gt, std::uint64_t seed, double center_sigma, double radius_jitter,
         double drop_rate, double spurious_rate, double score_noise, double image_w, double image_h) {
        PerturbConfig cfg;
        cfg.seed = seed;
        cfg.center_sigma = center_sigma;
        cfg.radius_jitter = radius_jitter;
        cfg.drop_rate = drop_rate;
        cfg.spurious_rate = spurious_rate;
        cfg.score_noise = score_noise;
        cfg.image_w = image_w;
        cfg.image_h = image_h;
        return perturb_detections(gt, cfg);
      },
      py::arg("gt"), py::kw_only(), py::arg("seed") = 0, py::arg("center_sigma") = 0.0,
      py::arg("radius_jitter") = 0.0, py::arg("drop_rate") = 0.0, py::arg("spurious_rate") = 0.0,
      py::arg("score_noise") = 0.0, py::arg("image_w") = 512.0, py::arg("image_h") = 512.0);

  // ---------------------------------------------------------------- reftrainer
  m.def(
      "fit_maps",
      [](const HeatmapTargets& t, int steps, double lr, const std::string& init, double noise_sigma,
         std::uint64_t seed, int max_backtracks, int record_every) {
        FitConfig cfg;
        cfg.steps = steps;
        cfg.learning_rate = lr;
        if (init == "zeros") {
          cfg.init = FitConfig::Init::kZeros;
        } else if (init == "noise") {
          cfg.init = FitConfig::Init::kNoise;
        } else {
          throw std::invalid_argument("init must be 'zeros' or 'noise'");
        }
        cfg.noise_sigma = noise_sigma;
        cfg.seed = seed;
        cfg.max_backtracks = max_backtracks;
        cfg.record_every = record_every;
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit_maps(t, cfg);
        }
        Array traj({static_cast<py::ssize_t>(r.trajectory.size()), py::ssize_t{5}});
        auto v = traj.mutable_unchecked<2>();
        for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
          const auto& s = r.trajectory[i];
          v(i, 0) = s.step;
          v(i, 1) = s.focal;
          v(i, 2) = s.offset;
          v(i, 3) = s.radius;
          v(i, 4) = s.total;
        }
        return py::make_tuple(std::move(r.maps), traj);
      },
      py::arg("targets"), py::kw_only(), py::arg("steps") = 500, py::arg("lr") = 0.5, py::arg("init") = "zeros",
      py::arg("noise_sigma") = 0.1, py::arg("seed") = 0, py::arg("max_backtracks") = 40, py::arg("record_every") = 1,
      "Gradient-descent fit of output maps to targets; returns (maps, trajectory rows of "
      "(step, focal, offset, radius, total)).");
}
