"""Icon boxes from corner quadruples and openings from endpoint pairs."""

from __future__ import annotations

import math

import numpy as np

from ..core import (
    AXIS_TOL,
    OPENING_WALL_MARGIN,
    Icon,
    IconClass,
    IconCorner,
    Opening,
    OpeningEndpoint,
    Point,
    point_in_polygon,
)
from .rooms import vote_label
from .walls import centerline_pixels

_NOT_ICONS = (IconClass.Empty, IconClass.Window, IconClass.Door)


def extract_icons(points, icons_map: np.ndarray, tol: float = AXIS_TOL,
                  diagnostics: list | None = None) -> list[Icon]:
    """Boxes from mutually aligned NW/NE/SW/SE corners, labelled by vote.

    Each NW corner (top to bottom, left to right) takes the nearest unused
    aligned NE and SW corners and the SE corner nearest to their implied
    position.  Boxes whose interior holds no icon-class pixels are dropped.
    """
    diags = diagnostics if diagnostics is not None else []
    by_corner = {c: [] for c in ("NW", "NE", "SW", "SE")}
    for k, p in enumerate(points):
        if isinstance(p.kind, IconCorner):
            by_corner[p.kind.corner].append((k, p.location))
    used = set()
    h, w = icons_map.shape
    icons = []

    def nearest(cands, score):
        best = None
        for k, loc in cands:
            if k in used:
                continue
            s = score(loc)
            if s is not None and (best is None or s < best[0]):
                best = (s, k, loc)
        return best

    for k_nw, nw in sorted(by_corner["NW"], key=lambda e: (e[1].y, e[1].x)):
        ne = nearest(by_corner["NE"], lambda q: q.x - nw.x
                     if abs(q.y - nw.y) <= tol and q.x - nw.x > tol else None)
        sw = nearest(by_corner["SW"], lambda q: q.y - nw.y
                     if abs(q.x - nw.x) <= tol and q.y - nw.y > tol else None)
        if ne is None or sw is None:
            continue
        ex, ey = ne[2].x, sw[2].y
        se = nearest(by_corner["SE"], lambda q: math.hypot(q.x - ex, q.y - ey)
                     if abs(q.x - ex) <= tol and abs(q.y - ey) <= tol else None)
        if se is None:
            continue
        x0, x1 = (nw.x + sw[2].x) / 2, (ne[2].x + se[2].x) / 2
        y0, y1 = (nw.y + ne[2].y) / 2, (sw[2].y + se[2].y) / 2
        region = icons_map[max(0, math.ceil(y0)):min(h, math.ceil(y1)),
                           max(0, math.ceil(x0)):min(w, math.ceil(x1))]
        label = vote_label(region, _NOT_ICONS, len(IconClass))
        if label is None:
            diags.append({"stage": "icons", "event": "empty_icon_box",
                          "bbox": [x0, y0, x1, y1]})
            continue
        used.update((k_nw, ne[1], sw[1], se[1]))
        icons.append(Icon((Point(x0, y0), Point(x1, y1)), IconClass(label)))
    return icons


def _pairs(ends, tol):
    """Candidate (start, end, distance) pairs of facing opening endpoints."""
    starts = {"right": [], "down": []}
    stops = {"left": [], "up": []}
    for k, loc, d in ends:
        (starts if d in starts else stops)[d].append((k, loc))
    cands = []
    for ka, a in starts["right"]:
        for kb, b in stops["left"]:
            if abs(b.y - a.y) <= tol and b.x - a.x > tol:
                cands.append((math.dist(a, b), ka, kb, "h"))
    for ka, a in starts["down"]:
        for kb, b in stops["up"]:
            if abs(b.x - a.x) <= tol and b.y - a.y > tol:
                cands.append((math.dist(a, b), ka, kb, "v"))
    cands.sort(key=lambda c: (c[0], c[1], c[2]))
    return cands


def extract_openings(points, icons_map: np.ndarray, walls, tol: float = AXIS_TOL,
                     margin: float = OPENING_WALL_MARGIN,
                     diagnostics: list | None = None) -> list[Opening]:
    """Pair facing endpoints that sit inside walls; label from Window/Door pixels.

    The segment is snapped onto the centerline of the wall holding both
    endpoints and inherits that wall's width.
    """
    diags = diagnostics if diagnostics is not None else []
    polys = [wall.polygon for wall in walls]
    ends = []
    for k, p in enumerate(points):
        if not isinstance(p.kind, OpeningEndpoint):
            continue
        if any(point_in_polygon(p.location, poly, margin) for poly in polys):
            ends.append((k, p.location, p.kind.direction))
        else:
            diags.append({"stage": "openings", "event": "endpoint_outside_walls",
                          "point": [p.location.x, p.location.y]})
    loc_of = {k: loc for k, loc, _ in ends}
    used = set()
    openings = []
    for _, ka, kb, axis in _pairs(ends, tol):
        if ka in used or kb in used:
            continue
        a, b = loc_of[ka], loc_of[kb]
        host = None
        for wall, poly in zip(walls, polys):
            if wall.is_horizontal != (axis == "h"):
                continue
            if not (point_in_polygon(a, poly, margin) and point_in_polygon(b, poly, margin)):
                continue
            (wx0, wy0), (wx1, wy1) = wall.centerline
            off = abs((a.y + b.y) / 2 - (wy0 + wy1) / 2) if axis == "h" \
                else abs((a.x + b.x) / 2 - (wx0 + wx1) / 2)
            if host is None or off < host[0]:
                host = (off, wall)
        if host is None:
            diags.append({"stage": "openings", "event": "pair_without_host_wall",
                          "segment": [list(a), list(b)]})
            continue
        wall = host[1]
        (wx0, wy0), (wx1, wy1) = wall.centerline
        if axis == "h":
            c = (wy0 + wy1) / 2
            seg = (Point(a.x, c), Point(b.x, c))
        else:
            c = (wx0 + wx1) / 2
            seg = (Point(c, a.y), Point(c, b.y))
        rows, cols = centerline_pixels(*seg, icons_map.shape)
        counts = np.bincount(icons_map[rows, cols], minlength=len(IconClass))
        win, door = int(counts[IconClass.Window]), int(counts[IconClass.Door])
        if win == 0 and door == 0:
            diags.append({"stage": "openings", "event": "unlabeled_opening",
                          "segment": [list(seg[0]), list(seg[1])]})
            continue
        label = IconClass.Window if win >= door else IconClass.Door
        used.update((ka, kb))
        openings.append(Opening(seg, wall.width, label))
    openings.sort(key=lambda o: (o.segment[0].y, o.segment[0].x))
    return openings
