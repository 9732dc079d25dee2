"""Four-step post-processor from network-style outputs to a vector model."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import (
    AXIS_TOL,
    N_CHANNELS,
    OPENING_WALL_MARGIN,
    FloorplanModel,
    InterestPointSet,
    Point,
    Wall,
    validate_model,
)
from ..errors import NoWallPixels, ShapeMismatch
from ..raster import SegmentationMaps
from .objects import extract_icons, extract_openings
from .peaks import DEFAULT_NMS_RADIUS, DEFAULT_THRESHOLD, detect_peaks
from .rooms import DEFAULT_SEPARATING_COVERAGE, extract_rooms
from .walls import (
    DEFAULT_MIN_COVERAGE,
    build_wall_skeleton,
    estimate_wall_width,
    snapped_junctions,
)


@dataclass(frozen=True)
class VectorizeConfig:
    threshold: float = DEFAULT_THRESHOLD
    nms_radius: float = DEFAULT_NMS_RADIUS
    axis_tol: float = AXIS_TOL
    min_wall_coverage: float = DEFAULT_MIN_COVERAGE
    separating_coverage: float = DEFAULT_SEPARATING_COVERAGE
    opening_margin: float = OPENING_WALL_MARGIN

    def to_dict(self):
        return asdict(self)


@dataclass
class VectorizeResult:
    model: FloorplanModel
    points: InterestPointSet
    diagnostics: list = field(default_factory=list)


def vectorize(maps: SegmentationMaps, stack: np.ndarray,
              config: VectorizeConfig = VectorizeConfig()) -> VectorizeResult:
    """Peaks, wall skeleton and widths, rooms, icons, then openings.

    Never raises on content: problems are recorded in ``diagnostics``.
    """
    rooms_map = np.asarray(maps.rooms)
    icons_map = np.asarray(maps.icons)
    stack = np.asarray(stack, dtype=np.float32)
    if rooms_map.shape != icons_map.shape or stack.shape[1:] != rooms_map.shape:
        raise ShapeMismatch(
            f"maps {rooms_map.shape}/{icons_map.shape} vs heatmaps {stack.shape}")
    if stack.shape[0] != N_CHANNELS:
        raise ShapeMismatch(f"expected {N_CHANNELS} heatmap channels, got {stack.shape[0]}")
    h, w = rooms_map.shape
    diags: list = []
    tol = config.axis_tol

    points = detect_peaks(stack, config.threshold, config.nms_radius)
    pts = points.points
    skeleton = build_wall_skeleton(pts, rooms_map, tol, config.min_wall_coverage)
    for i, j in skeleton.pruned:
        diags.append({"stage": "walls", "event": "pruned_segment",
                      "segment": [list(pts[i].location), list(pts[j].location)]})

    locs = snapped_junctions(pts, tol)
    walls = []
    for i, j in skeleton.segments:
        a, b = locs[i], locs[j]
        if abs(b.x - a.x) >= abs(b.y - a.y):
            c = (a.y + b.y) / 2
            centerline = (Point(a.x, c), Point(b.x, c))
        else:
            c = (a.x + b.x) / 2
            centerline = (Point(c, a.y), Point(c, b.y))
        try:
            width = estimate_wall_width(centerline, rooms_map)
        except NoWallPixels:
            diags.append({"stage": "walls", "event": "no_wall_pixels",
                          "segment": [list(centerline[0]), list(centerline[1])]})
            continue
        walls.append(Wall(centerline, width))

    rooms = extract_rooms(pts, rooms_map, skeleton, tol, config.separating_coverage, diags)
    icons = extract_icons(pts, icons_map, tol, diags)
    openings = extract_openings(pts, icons_map, walls, tol, config.opening_margin, diags)
    # canonical order: top-to-bottom, then left-to-right
    walls.sort(key=lambda wl: (wl.centerline[0].y, wl.centerline[0].x,
                               wl.centerline[1].y, wl.centerline[1].x))
    icons.sort(key=lambda ic: (ic.bbox[0].y, ic.bbox[0].x))
    model = FloorplanModel((w, h), walls, rooms, icons, openings)
    for v in validate_model(model):
        diags.append({"stage": "validate", "event": "violation",
                      "element": v.element, "invariant": v.invariant})
    return VectorizeResult(model, points, diags)
