"""Room recovery: junction-triplet cell grid, cell voting and merging."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import AXIS_TOL, Point, Room, RoomClass
from .walls import WallSkeleton, snapped_junctions

DEFAULT_SEPARATING_COVERAGE = 0.95
_QUADRANTS = ((1, 1), (-1, 1), (1, -1), (-1, -1))


@dataclass(frozen=True)
class CellGrid:
    """Junction-free rectangles ``(x0, y0, x1, y1)`` with integer bounds.

    ``adjacency`` holds ``(i, j, (axis, coord, lo, hi))`` where ``axis`` is
    ``"v"`` for a shared vertical edge at ``x = coord`` spanning ``lo..hi``
    in ``y``, and ``"h"`` for a horizontal one.
    """

    cells: tuple[tuple[int, int, int, int], ...] = ()
    adjacency: tuple = ()
    diagnostics: tuple = field(default=(), compare=False)


def _skeleton_lines(skeleton, locs):
    horiz, vert = [], []
    for i, j in skeleton.segments:
        if i not in locs or j not in locs:
            continue
        a, b = locs[i], locs[j]
        if abs(b.x - a.x) >= abs(b.y - a.y):
            horiz.append(((a.y + b.y) / 2, min(a.x, b.x), max(a.x, b.x)))
        else:
            vert.append(((a.x + b.x) / 2, min(a.y, b.y), max(a.y, b.y)))
    return horiz, vert


def build_cell_grid(points, skeleton: WallSkeleton | None = None,
                    tol: float = AXIS_TOL) -> CellGrid:
    """Rectangles spanned by junction triplets that hold no other junction.

    For every junction and each of the four quadrants, the nearest aligned
    junction along each axis closes a triplet.  The rectangle is kept when
    no other junction lies in it (boundary included, within ``tol``) and
    no skeleton segment crosses its interior.  Overlapping survivors are
    resolved smallest-first and reported.
    """
    locs = snapped_junctions(points, tol)
    keys = list(locs)
    diags = []
    if len(keys) < 3:
        return CellGrid()
    P = np.array([locs[k] for k in keys], dtype=np.float64)
    horiz, vert = _skeleton_lines(skeleton or WallSkeleton(), locs)
    found = {}
    for a in range(len(keys)):
        ax, ay = P[a]
        same_row = np.abs(P[:, 1] - ay) <= tol
        same_col = np.abs(P[:, 0] - ax) <= tol
        for sx, sy in _QUADRANTS:
            dxs = (P[:, 0] - ax) * sx
            dys = (P[:, 1] - ay) * sy
            cand_b = np.nonzero(same_row & (dxs > tol))[0]
            cand_c = np.nonzero(same_col & (dys > tol))[0]
            if cand_b.size == 0 or cand_c.size == 0:
                continue
            b = int(cand_b[np.argmin(dxs[cand_b])])
            c = int(cand_c[np.argmin(dys[cand_c])])
            bx, cy = P[b, 0], P[c, 1]
            corners = {a, b, c}
            d_hit = np.nonzero((np.abs(P[:, 0] - bx) <= tol) & (np.abs(P[:, 1] - cy) <= tol))[0]
            corners.update(int(k) for k in d_hit)
            key = frozenset(corners)
            if key in found:
                continue
            x0, x1 = sorted((ax, bx))
            y0, y1 = sorted((ay, cy))
            inside = ((P[:, 0] > x0 - tol) & (P[:, 0] < x1 + tol)
                      & (P[:, 1] > y0 - tol) & (P[:, 1] < y1 + tol))
            inside[list(corners)] = False
            if inside.any():
                found[key] = None
                continue
            crossed = any(y0 + tol < y < y1 - tol and min(hi, x1 - tol) > max(lo, x0 + tol)
                          for y, lo, hi in horiz)
            crossed = crossed or any(
                x0 + tol < x < x1 - tol and min(hi, y1 - tol) > max(lo, y0 + tol)
                for x, lo, hi in vert)
            if crossed:
                found[key] = None
                continue
            rect = (int(round(x0)), int(round(y0)), int(round(x1)), int(round(y1)))
            found[key] = rect if rect[2] > rect[0] and rect[3] > rect[1] else None

    rects = sorted({r for r in found.values() if r is not None},
                   key=lambda r: ((r[2] - r[0]) * (r[3] - r[1]), r[1], r[0], r[3], r[2]))
    cells = []
    for r in rects:
        clash = next((c for c in cells
                      if min(r[2], c[2]) > max(r[0], c[0]) and min(r[3], c[3]) > max(r[1], c[1])),
                     None)
        if clash is not None:
            diags.append({"stage": "rooms", "event": "overlapping_cell", "cell": list(r),
                          "overlaps": list(clash)})
            continue
        cells.append(r)
    cells.sort(key=lambda r: (r[1], r[0], r[3], r[2]))

    adjacency = []
    for i, ci in enumerate(cells):
        for j in range(i + 1, len(cells)):
            cj = cells[j]
            for xa, xb in ((ci[2], cj[0]), (ci[0], cj[2])):
                if xa == xb:
                    lo, hi = max(ci[1], cj[1]), min(ci[3], cj[3])
                    if hi > lo:
                        adjacency.append((i, j, ("v", xa, lo, hi)))
            for ya, yb in ((ci[3], cj[1]), (ci[1], cj[3])):
                if ya == yb:
                    lo, hi = max(ci[0], cj[0]), min(ci[2], cj[2])
                    if hi > lo:
                        adjacency.append((i, j, ("h", ya, lo, hi)))
    return CellGrid(tuple(cells), tuple(adjacency), tuple(diags))


def vote_label(region: np.ndarray, exclude, n_classes: int):
    """Majority class in ``region`` ignoring ``exclude``; ties go to the lowest code."""
    counts = np.bincount(region.ravel(), minlength=n_classes)[:n_classes].copy()
    counts[list(exclude)] = 0
    if counts.sum() == 0:
        return None
    return int(np.argmax(counts))


def edge_coverage(edge, skeleton, locs, tol: float = AXIS_TOL) -> float:
    """Fraction of a shared cell edge lying under skeleton segments."""
    axis, coord, lo, hi = edge
    horiz, vert = _skeleton_lines(skeleton, locs)
    lines = vert if axis == "v" else horiz
    spans = sorted((max(lo, a), min(hi, b)) for c, a, b in lines
                   if abs(c - coord) <= tol and min(hi, b) > max(lo, a))
    covered, cursor = 0.0, lo
    for a, b in spans:
        a = max(a, cursor)
        if b > a:
            covered += b - a
            cursor = b
    return covered / (hi - lo)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def rectangles_outline(rects):
    """Boundary loops of a union of integer rectangles.

    Returns loops as vertex lists with collinear vertices removed; outer
    boundaries have positive shoelace area and start at their minimum
    ``(y, x)`` vertex.
    """
    xs = sorted({v for r in rects for v in (r[0], r[2])})
    ys = sorted({v for r in rects for v in (r[1], r[3])})
    xi = {v: k for k, v in enumerate(xs)}
    yi = {v: k for k, v in enumerate(ys)}
    occ = np.zeros((len(ys) + 1, len(xs) + 1), dtype=bool)
    for x0, y0, x1, y1 in rects:
        occ[yi[y0] + 1:yi[y1] + 1, xi[x0] + 1:xi[x1] + 1] = True
    out_edges = {}
    for r in range(1, len(ys)):
        for c in range(1, len(xs)):
            if not occ[r, c]:
                continue
            x0, x1, y0, y1 = xs[c - 1], xs[c], ys[r - 1], ys[r]
            if not occ[r - 1, c]:
                out_edges.setdefault((x0, y0), []).append((x1, y0))
            if not occ[r, c + 1]:
                out_edges.setdefault((x1, y0), []).append((x1, y1))
            if not occ[r + 1, c]:
                out_edges.setdefault((x1, y1), []).append((x0, y1))
            if not occ[r, c - 1]:
                out_edges.setdefault((x0, y1), []).append((x0, y0))

    def heading(a, b):
        return (int(np.sign(b[0] - a[0])), int(np.sign(b[1] - a[1])))

    loops = []
    while out_edges:
        start = min(out_edges, key=lambda p: (p[1], p[0]))
        loop = [start]
        prev_dir = None
        cur = start
        while True:
            options = out_edges[cur]
            if len(options) > 1 and prev_dir is not None:
                # y grows downward: a screen right turn maps (dx, dy) to (-dy, dx)
                right = (-prev_dir[1], prev_dir[0])
                options.sort(key=lambda q: 0 if heading(cur, q) == right
                             else (1 if heading(cur, q) == prev_dir else 2))
            nxt = options.pop(0)
            if not options:
                del out_edges[cur]
            prev_dir = heading(cur, nxt)
            cur = nxt
            if cur == start:
                break
            loop.append(cur)
        loops.append(_drop_collinear(loop))
    return loops


def _drop_collinear(loop):
    out = []
    n = len(loop)
    for k in range(n):
        a, b, c = loop[k - 1], loop[k], loop[(k + 1) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) != 0:
            out.append(b)
    if not out:
        return out
    s = min(range(len(out)), key=lambda k: (out[k][1], out[k][0]))
    return out[s:] + out[:s]


def _loop_area(loop):
    s = 0
    for k in range(len(loop)):
        x0, y0 = loop[k]
        x1, y1 = loop[(k + 1) % len(loop)]
        s += x0 * y1 - x1 * y0
    return s / 2


def extract_rooms(points, rooms_map: np.ndarray, skeleton: WallSkeleton,
                  tol: float = AXIS_TOL,
                  separating_coverage: float = DEFAULT_SEPARATING_COVERAGE,
                  diagnostics: list | None = None) -> list[Room]:
    """Cells from junction triplets, labelled by vote, merged when not walled off.

    Voting ignores Background and Wall pixels; cells with no remaining
    votes are dropped.  Two adjacent cells merge when they share a label
    and skeleton segments cover less than ``separating_coverage`` of their
    common edge.
    """
    diags = diagnostics if diagnostics is not None else []
    grid = build_cell_grid(points, skeleton, tol)
    diags.extend(grid.diagnostics)
    locs = snapped_junctions(points, tol)
    h, w = rooms_map.shape
    labels = []
    for cell in grid.cells:
        x0, y0, x1, y1 = cell
        region = rooms_map[max(0, y0):min(h, y1), max(0, x0):min(w, x1)]
        label = vote_label(region, (RoomClass.Background, RoomClass.Wall), len(RoomClass))
        if label is None:
            diags.append({"stage": "rooms", "event": "unlabeled_cell", "cell": list(cell)})
        labels.append(label)
    uf = _UnionFind(len(grid.cells))
    for i, j, edge in grid.adjacency:
        if labels[i] is None or labels[i] != labels[j]:
            continue
        if edge_coverage(edge, skeleton, locs, tol) < separating_coverage:
            uf.union(i, j)
    groups = {}
    for i, label in enumerate(labels):
        if label is not None:
            groups.setdefault(uf.find(i), []).append(i)
    rooms = []
    for members in groups.values():
        loops = rectangles_outline([grid.cells[i] for i in members])
        loops.sort(key=_loop_area, reverse=True)
        if len(loops) > 1:
            diags.append({"stage": "rooms", "event": "room_outline_has_extra_loops",
                          "cells": [list(grid.cells[i]) for i in members]})
        outer = loops[0]
        rooms.append(Room(tuple(Point(float(x), float(y)) for x, y in outer),
                          RoomClass(labels[members[0]])))
    rooms.sort(key=lambda r: (r.polygon[0].y, r.polygon[0].x))
    return rooms
