"""Wall skeleton from junction pairing, pruning and width estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import AXIS_TOL, Direction, Point, RoomClass, WallJunction
from ..errors import NoWallPixels

DEFAULT_MIN_COVERAGE = 0.5
WIDTH_STATIONS = 11
WIDTH_MARGIN = 0.1


@dataclass(frozen=True)
class WallSkeleton:
    """Segments as ``(i, j)`` index pairs into the point list, west/north end first."""

    segments: tuple[tuple[int, int], ...] = ()
    pruned: tuple[tuple[int, int], ...] = ()


def _px(v: float) -> int:
    return int(math.floor(v + 0.5))


def snap_coordinates(values, tol: float = AXIS_TOL) -> list[float]:
    """Replace each value by the mean of its 1-D cluster.

    Sorted values join the current cluster while the gap to the previous
    value is at most ``tol``.
    """
    values = list(values)
    if not values:
        return []
    order = sorted(range(len(values)), key=lambda k: values[k])
    out = [0.0] * len(values)
    group = [order[0]]

    def flush():
        m = sum(values[k] for k in group) / len(group)
        for k in group:
            out[k] = m

    for prev, k in zip(order, order[1:]):
        if values[k] - values[prev] <= tol:
            group.append(k)
        else:
            flush()
            group = [k]
    flush()
    return out


def snapped_junctions(points, tol: float = AXIS_TOL) -> dict[int, Point]:
    """Snapped locations of the wall junctions in ``points``, keyed by index."""
    idx = [k for k, p in enumerate(points) if isinstance(p.kind, WallJunction)]
    xs = snap_coordinates([points[k].location.x for k in idx], tol)
    ys = snap_coordinates([points[k].location.y for k in idx], tol)
    return {k: Point(x, y) for k, x, y in zip(idx, xs, ys)}


def centerline_pixels(a, b, shape):
    """Pixel ``(rows, cols)`` sampled along an axis-aligned segment."""
    h, w = shape
    if abs(b[0] - a[0]) >= abs(b[1] - a[1]):
        row = _px((a[1] + b[1]) / 2)
        lo, hi = sorted((a[0], b[0]))
        cols = np.arange(max(0, math.ceil(lo)), min(w - 1, math.floor(hi)) + 1)
        if not 0 <= row < h:
            cols = cols[:0]
        return np.full(cols.size, row, dtype=np.int64), cols.astype(np.int64)
    col = _px((a[0] + b[0]) / 2)
    lo, hi = sorted((a[1], b[1]))
    rows = np.arange(max(0, math.ceil(lo)), min(h - 1, math.floor(hi)) + 1)
    if not 0 <= col < w:
        rows = rows[:0]
    return rows.astype(np.int64), np.full(rows.size, col, dtype=np.int64)


def wall_coverage(a, b, rooms_map) -> float:
    rows, cols = centerline_pixels(a, b, rooms_map.shape)
    if rows.size == 0:
        return 0.0
    return float(np.count_nonzero(rooms_map[rows, cols] == RoomClass.Wall)) / rows.size


def build_wall_skeleton(points, rooms_map, tol: float = AXIS_TOL,
                        min_coverage: float = DEFAULT_MIN_COVERAGE) -> WallSkeleton:
    """Pair facing junction arms nearest-first, then prune by wall coverage.

    Each arm takes part in at most one segment.  Pruning runs after the
    pairing, so removing wall pixels can only remove segments.
    """
    junctions = [(k, p.location, p.kind.arms) for k, p in enumerate(points)
                 if isinstance(p.kind, WallJunction)]
    candidates = []
    for ia, (ka, la, arms_a) in enumerate(junctions):
        for kb, lb, arms_b in junctions[ia + 1:]:
            dx, dy = lb.x - la.x, lb.y - la.y
            if abs(dy) <= tol and abs(dx) > tol:
                west, east = ((ka, arms_a), (kb, arms_b)) if dx > 0 else ((kb, arms_b), (ka, arms_a))
                if Direction.E in west[1] and Direction.W in east[1]:
                    candidates.append((math.hypot(dx, dy), west[0], east[0], Direction.E))
            elif abs(dx) <= tol and abs(dy) > tol:
                north, south = ((ka, arms_a), (kb, arms_b)) if dy > 0 else ((kb, arms_b), (ka, arms_a))
                if Direction.S in north[1] and Direction.N in south[1]:
                    candidates.append((math.hypot(dx, dy), north[0], south[0], Direction.S))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    used = set()
    paired = []
    for _, i, j, d in candidates:
        if (i, d) in used or (j, d.opposite) in used:
            continue
        used.add((i, d))
        used.add((j, d.opposite))
        paired.append((i, j))
    kept, pruned = [], []
    for i, j in paired:
        cov = wall_coverage(points[i].location, points[j].location, rooms_map)
        (kept if cov >= min_coverage else pruned).append((i, j))
    return WallSkeleton(tuple(kept), tuple(pruned))


def estimate_wall_width(segment, rooms_map, stations: int = WIDTH_STATIONS,
                        margin: float = WIDTH_MARGIN) -> float:
    """Median perpendicular run of Wall pixels over evenly spaced stations.

    Stations skip ``margin`` of the length at both ends; stations whose
    centre pixel is not Wall are ignored.  Raises ``NoWallPixels`` when no
    station touches the wall class.
    """
    (ax, ay), (bx, by) = segment
    h, w = rooms_map.shape
    horizontal = abs(bx - ax) >= abs(by - ay)
    runs = []
    for k in range(stations):
        t = margin + (1 - 2 * margin) * k / (stations - 1)
        col, row = _px(ax + t * (bx - ax)), _px(ay + t * (by - ay))
        if not (0 <= row < h and 0 <= col < w) or rooms_map[row, col] != RoomClass.Wall:
            continue
        if horizontal:
            line, pos = rooms_map[:, col] == RoomClass.Wall, row
        else:
            line, pos = rooms_map[row, :] == RoomClass.Wall, col
        lo = pos
        while lo - 1 >= 0 and line[lo - 1]:
            lo -= 1
        hi = pos
        while hi + 1 < line.size and line[hi + 1]:
            hi += 1
        runs.append(hi - lo + 1)
    if not runs:
        raise NoWallPixels(f"no wall pixels along segment {segment}")
    return float(max(1.0, np.median(runs)))
