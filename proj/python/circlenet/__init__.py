# Copyright 2026 The circlenet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Circle-representation object detection toolkit.

Geometry (circle IoU), heatmap target encoding, detection losses, decoding,
evaluation (COCO-style AP, FROC, rotation consistency, mask/detection ratio),
synthetic scenes and a reference map fitter. Grids are float64 numpy arrays
shaped (channels, height, width).
"""

from ._core import (
    Box,
    Circle,
    EncodeError,
    EvalReport,
    FitDivergence,
    HeatmapTargets,
    ImageRecords,
    OutputMaps,
    Scene,
    box_iou,
    ciou,
    ciou_monte_carlo,
    circle_intersection_area,
    circle_nms,
    circle_to_tight_box,
    decode,
    displacement_study,
    encode,
    evaluate,
    fit_maps,
    focal_loss,
    froc,
    gaussian_sigma,
    generate_scene,
    inscribed_circle,
    inscribed_polygon,
    mask_detection_ratio,
    match_detections,
    offset_loss,
    optimal_maps,
    perfect_maps,
    perturb_detections,
    polygon_area,
    radius_loss,
    rotate90,
    rotate_maps,
    rotation_consistency,
    total_loss,
    unrotate90,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
