"""Ground-truth rasterization: segmentation maps and the 21-channel heatmap stack."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .core import (
    AXIS_TOL,
    N_CHANNELS,
    Direction,
    FloorplanModel,
    IconCorner,
    InterestPoint,
    InterestPointSet,
    OpeningEndpoint,
    Point,
    RoomClass,
    WallJunction,
    _dist_point_segment,
    direction_between,
)
from .errors import DegenerateWallGraph, PointOutOfFrame

DEFAULT_SIGMA = 2.0
# Gaussians are evaluated out to this many sigmas and are zero beyond.
HEATMAP_TRUNCATE = 5.0
JUNCTION_CLUSTER_RADIUS = AXIS_TOL


class SegmentationMaps(NamedTuple):
    rooms: np.ndarray
    icons: np.ndarray


def _cluster_endpoints(points, radius):
    parent = list(range(len(points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if math.dist(points[i], points[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(len(points)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def wall_junctions(walls) -> list[InterestPoint]:
    """Classify every wall-endpoint cluster by its incident arm directions.

    A cluster whose arms are two opposite directions is a straight
    pass-through and yields no junction.
    """
    ends = []
    for w, wall in enumerate(walls):
        a, b = wall.centerline
        ends.append((a, b, w))
        ends.append((b, a, w))
    clusters = _cluster_endpoints([e[0] for e in ends], JUNCTION_CLUSTER_RADIUS)
    out = []
    for members in clusters:
        cx = sum(ends[k][0].x for k in members) / len(members)
        cy = sum(ends[k][0].y for k in members) / len(members)
        loc = Point(cx, cy)
        arms = []
        incident = set()
        for k in members:
            _, other, w = ends[k]
            incident.add(w)
            arms.append(direction_between(loc, other))
        for w, wall in enumerate(walls):
            if w in incident:
                continue
            a, b = wall.centerline
            if (_dist_point_segment(cx, cy, a.x, a.y, b.x, b.y) <= JUNCTION_CLUSTER_RADIUS
                    and math.dist(loc, a) > JUNCTION_CLUSTER_RADIUS
                    and math.dist(loc, b) > JUNCTION_CLUSTER_RADIUS):
                d = direction_between(a, b)
                arms.extend([d, d.opposite])
        if len(set(arms)) != len(arms):
            raise DegenerateWallGraph(
                f"collinear walls overlap near ({cx:g}, {cy:g})")
        if len(arms) == 2 and arms[0] == arms[1].opposite:
            continue
        out.append(InterestPoint(loc, WallJunction.from_arms(arms)))
    out.sort(key=lambda p: (p.location.y, p.location.x))
    return out


def opening_endpoints(opening) -> tuple[InterestPoint, InterestPoint]:
    a, b = opening.segment
    names = {Direction.E: "right", Direction.W: "left", Direction.N: "up", Direction.S: "down"}
    da = direction_between(a, b)
    return (InterestPoint(a, OpeningEndpoint(names[da])),
            InterestPoint(b, OpeningEndpoint(names[da.opposite])))


def extract_interest_points(model: FloorplanModel) -> InterestPointSet:
    """Wall junctions, then four corners per icon, then two ends per opening."""
    pts = wall_junctions(model.walls)
    for icon in model.icons:
        for name, loc in icon.corners.items():
            pts.append(InterestPoint(loc, IconCorner(name)))
    for op in model.openings:
        pts.extend(opening_endpoints(op))
    return InterestPointSet(tuple(pts))


def _fill(canvas, polygon, value):
    xs = np.fromiter((p[0] for p in polygon), dtype=np.float64, count=len(polygon))
    ys = np.fromiter((p[1] for p in polygon), dtype=np.float64, count=len(polygon))
    kernels.fill_polygon(canvas, xs, ys, int(value))


def render_segmentation(model: FloorplanModel) -> SegmentationMaps:
    """Paint rooms then walls on the room map, icons then openings on the icon map."""
    w, h = model.image_size
    rooms = np.zeros((h, w), dtype=np.uint8)
    icons = np.zeros((h, w), dtype=np.uint8)
    for room in model.rooms:
        _fill(rooms, room.polygon, room.label)
    for wall in model.walls:
        _fill(rooms, wall.polygon, RoomClass.Wall)
    for icon in model.icons:
        _fill(icons, icon.polygon, icon.label)
    for op in model.openings:
        _fill(icons, op.polygon, op.label)
    return SegmentationMaps(rooms, icons)


def render_heatmaps(points, size, sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    """Max-combined unnormalized Gaussians, one channel per interest-point kind.

    ``size`` is ``(width, height)``; the result has shape ``(21, height, width)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    w, h = size
    stack = np.zeros((N_CHANNELS, h, w), dtype=np.float32)
    radius = int(math.ceil(HEATMAP_TRUNCATE * sigma))
    for p in points:
        x, y = p.location
        if not (-0.5 <= x <= w - 0.5 and -0.5 <= y <= h - 0.5):
            raise PointOutOfFrame(f"point ({x:g}, {y:g}) outside {w}x{h} frame")
        kernels.splat_gaussian(stack[p.channel], float(x), float(y), float(sigma), radius)
    return stack


def render(model: FloorplanModel, sigma: float = DEFAULT_SIGMA):
    """``(SegmentationMaps, heatmap stack)`` for a model."""
    maps = render_segmentation(model)
    stack = render_heatmaps(extract_interest_points(model), model.image_size, sigma)
    return maps, stack
