"""Seeded generator of valid Manhattan floorplans and a map corruption probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Direction,
    FloorplanModel,
    Icon,
    IconClass,
    Opening,
    Point,
    Room,
    RoomClass,
    Wall,
    validate_model,
)
from .errors import InfeasibleConfig
from .raster import DEFAULT_SIGMA, SegmentationMaps, render_heatmaps

ROOM_LABELS = tuple(c for c in RoomClass
                    if c not in (RoomClass.Background, RoomClass.Wall, RoomClass.Railing))
ICON_LABELS = tuple(c for c in IconClass
                    if c not in (IconClass.Empty, IconClass.Window, IconClass.Door))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    image_size: tuple[int, int] = (256, 256)
    grid: tuple[int, int] = (2, 2)  # rows x cols
    wall_width_range: tuple[int, int] = (3, 6)
    icon_count_range: tuple[int, int] = (0, 3)
    opening_count_range: tuple[int, int] = (0, 3)
    min_separation: int = 8
    margin: int = 16
    jitter: float = 0.2
    merge_probability: float = 0.25

    def check(self):
        w, h = self.image_size
        rows, cols = self.grid
        if w <= 0 or h <= 0 or rows <= 0 or cols <= 0:
            raise InfeasibleConfig("image size and grid dims must be positive")
        if self.min_separation < 8:
            raise InfeasibleConfig("min_separation must be >= 8 px")
        for name in ("wall_width_range", "icon_count_range", "opening_count_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise InfeasibleConfig(f"{name} must satisfy 0 <= lo <= hi")
        if self.wall_width_range[0] < 1:
            raise InfeasibleConfig("walls must be at least 1 px wide")


def _grid_lines(rng, start, stop, n, min_cell, jitter):
    cell = (stop - start) / n
    if cell < min_cell:
        raise InfeasibleConfig(
            f"cells of {cell:.1f} px cannot hold walls, icons and the required separation")
    amp = max(0.0, min(jitter * cell, (cell - min_cell) / 2))
    lines = [start]
    for k in range(1, n):
        lines.append(int(round(start + k * cell + rng.uniform(-amp, amp))))
    lines.append(int(round(stop)))
    lines[0] = int(round(start))
    if any(b - a < min_cell for a, b in zip(lines, lines[1:])):
        raise InfeasibleConfig("jittered grid violates the minimum cell size")
    return lines


def generate(config: SynthConfig) -> FloorplanModel:
    config.check()
    rng = np.random.default_rng(config.seed)
    W, H = config.image_size
    rows, cols = config.grid
    sep = config.min_separation
    wlo, whi = config.wall_width_range
    min_cell = 2 * whi + 2 * sep
    xs = _grid_lines(rng, config.margin, W - 1 - config.margin, cols, min_cell, config.jitter)
    ys = _grid_lines(rng, config.margin, H - 1 - config.margin, rows, min_cell, config.jitter)

    # Horizontal edge (r, c) joins grid points (c, r)-(c+1, r); vertical (r, c) joins (c, r)-(c, r+1).
    h_edges = {(r, c) for r in range(rows + 1) for c in range(cols)}
    v_edges = {(r, c) for r in range(rows) for c in range(cols + 1)}

    partner = {}
    for flat in rng.permutation(rows * cols):
        r, c = divmod(int(flat), cols)
        if (r, c) in partner or rng.random() >= config.merge_probability:
            continue
        nbrs = [(r + dr, c + dc) for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0))
                if 0 <= r + dr < rows and 0 <= c + dc < cols and (r + dr, c + dc) not in partner]
        if not nbrs:
            continue
        other = nbrs[int(rng.integers(len(nbrs)))]
        partner[(r, c)] = other
        partner[other] = (r, c)
        (r0, c0), (r1, c1) = sorted([(r, c), other])
        if r0 == r1:
            v_edges.discard((r0, c1))
        else:
            h_edges.discard((r1, c0))

    def arms(r, c):
        out = set()
        if (r, c) in h_edges:
            out.add(Direction.E)
        if (r, c - 1) in h_edges:
            out.add(Direction.W)
        if (r, c) in v_edges:
            out.add(Direction.S)
        if (r - 1, c) in v_edges:
            out.add(Direction.N)
        return out

    # chains of collinear edges through straight pass-through points become one wall
    segments = []
    for r in range(rows + 1):
        start = None
        for c in range(cols + 1):
            if start is not None and (c == cols or (r, c) not in h_edges
                                      or arms(r, c) != {Direction.E, Direction.W}):
                segments.append(((xs[start], ys[r]), (xs[c], ys[r]), r in (0, rows)))
                start = None
            if start is None and (r, c) in h_edges:
                start = c
    for c in range(cols + 1):
        start = None
        for r in range(rows + 1):
            if start is not None and (r == rows or (r, c) not in v_edges
                                      or arms(r, c) != {Direction.N, Direction.S}):
                segments.append(((xs[c], ys[start]), (xs[c], ys[r]), c in (0, cols)))
                start = None
            if start is None and (r, c) in v_edges:
                start = r
    segments.sort(key=lambda s: (s[0][1], s[0][0], s[1][1], s[1][0]))
    walls = [Wall((a, b), int(rng.integers(wlo, whi + 1))) for a, b, _ in segments]
    interior = [w for w, (_, _, outer) in zip(walls, segments) if not outer]

    regions = []
    seen = set()
    for r in range(rows):
        for c in range(cols):
            if (r, c) in seen:
                continue
            cells = [(r, c)] + ([partner[(r, c)]] if (r, c) in partner else [])
            seen.update(cells)
            x0 = min(xs[cc] for _, cc in cells)
            x1 = max(xs[cc + 1] for _, cc in cells)
            y0 = min(ys[rr] for rr, _ in cells)
            y1 = max(ys[rr + 1] for rr, _ in cells)
            regions.append((x0, y0, x1, y1))
    regions.sort(key=lambda q: (q[1], q[0]))
    rooms = [Room(((x0, y0), (x1, y0), (x1, y1), (x0, y1)),
                  ROOM_LABELS[int(rng.integers(len(ROOM_LABELS)))])
             for x0, y0, x1, y1 in regions]

    icons = _place_icons(rng, config, regions)
    openings = _place_openings(rng, config, interior)

    model = FloorplanModel((W, H), walls, rooms, icons, openings)
    report = validate_model(model)
    if report:
        raise AssertionError(f"generator produced an invalid model: {list(report)}")
    return model


def _place_icons(rng, config, regions):
    lo, hi = config.icon_count_range
    target = int(rng.integers(lo, hi + 1))
    sep = config.min_separation
    inset = int(math.ceil(config.wall_width_range[1] / 2)) + 2
    placed = []
    for _ in range(target):
        for _attempt in range(50):
            x0, y0, x1, y1 = regions[int(rng.integers(len(regions)))]
            ix0, iy0, ix1, iy1 = x0 + inset, y0 + inset, x1 - inset, y1 - inset
            max_w = min(ix1 - ix0, 3 * sep)
            max_h = min(iy1 - iy0, 3 * sep)
            if max_w < sep or max_h < sep:
                continue
            bw = int(rng.integers(sep, max_w + 1))
            bh = int(rng.integers(sep, max_h + 1))
            bx = int(rng.integers(ix0, ix1 - bw + 1))
            by = int(rng.integers(iy0, iy1 - bh + 1))
            box = (bx, by, bx + bw, by + bh)
            if any(box[0] < q[2] + sep and q[0] < box[2] + sep
                   and box[1] < q[3] + sep and q[1] < box[3] + sep for q, _ in placed):
                continue
            placed.append((box, ICON_LABELS[int(rng.integers(len(ICON_LABELS)))]))
            break
    if len(placed) < lo:
        raise InfeasibleConfig(f"could place only {len(placed)} of {lo} required icons")
    placed.sort(key=lambda e: (e[0][1], e[0][0]))
    return [Icon(((b[0], b[1]), (b[2], b[3])), label) for b, label in placed]


def _place_openings(rng, config, interior_walls):
    lo, hi = config.opening_count_range
    target = int(rng.integers(lo, hi + 1))
    sep = config.min_separation
    clearance = sep + int(math.ceil(config.wall_width_range[1] / 2))
    out = []
    order = rng.permutation(len(interior_walls)) if interior_walls else []
    for k in order:
        if len(out) >= target:
            break
        wall = interior_walls[int(k)]
        length = int(round(wall.length))
        room = length - 2 * clearance
        if room < sep:
            continue
        size = int(rng.integers(sep, room + 1))
        start = int(rng.integers(clearance, length - clearance - size + 1))
        (ax, ay), _ = wall.centerline
        if wall.is_horizontal:
            seg = ((ax + start, ay), (ax + start + size, ay))
        else:
            seg = ((ax, ay + start), (ax, ay + start + size))
        label = (IconClass.Window, IconClass.Door)[int(rng.integers(2))]
        out.append(Opening(seg, wall.width, label))
    if len(out) < lo:
        raise InfeasibleConfig(f"could place only {len(out)} of {lo} required openings")
    out.sort(key=lambda o: (o.segment[0].y, o.segment[0].x))
    return out


def min_same_kind_distance(points) -> float:
    """Smallest distance between two interest points of the same kind (inf if none)."""
    best = math.inf
    by_kind = {}
    for p in points:
        by_kind.setdefault(p.kind, []).append(p.location)
    for locs in by_kind.values():
        for i in range(len(locs)):
            for j in range(i + 1, len(locs)):
                best = min(best, math.dist(locs[i], locs[j]))
    return best


@dataclass(frozen=True)
class NoiseConfig:
    gaussian_sigma: float = 0.0
    dropout_prob: float = 0.0
    jitter_px: float = 0.0


def corrupt(maps: SegmentationMaps, stack: np.ndarray, noise: NoiseConfig, seed: int = 0,
            sigma: float = DEFAULT_SIGMA):
    """Degrade ideal maps: peak jitter, clipped heatmap noise, pixel dropout.

    Jitter re-detects the peaks, displaces each uniformly within
    ``jitter_px`` per axis and re-renders with ``sigma``.  All-zero noise
    returns bit-exact copies.
    """
    if min(noise.gaussian_sigma, noise.dropout_prob, noise.jitter_px) < 0:
        raise ValueError("noise parameters must be >= 0")
    rng = np.random.default_rng(seed)
    rooms = np.array(maps.rooms, copy=True)
    icons = np.array(maps.icons, copy=True)
    out = np.array(stack, dtype=np.float32, copy=True)
    if noise.jitter_px > 0:
        from .core import InterestPoint
        from .vectorizer.peaks import detect_peaks

        c, h, w = out.shape
        moved = []
        for p in detect_peaks(out):
            dx, dy = rng.uniform(-noise.jitter_px, noise.jitter_px, size=2)
            x = min(max(p.location.x + dx, 0.0), w - 1.0)
            y = min(max(p.location.y + dy, 0.0), h - 1.0)
            moved.append(InterestPoint(Point(x, y), p.kind))
        out = render_heatmaps(moved, (w, h), sigma)
    if noise.gaussian_sigma > 0:
        out = np.clip(out + rng.normal(0.0, noise.gaussian_sigma, out.shape).astype(np.float32),
                      0.0, 1.0).astype(np.float32)
    if noise.dropout_prob > 0:
        rooms[rng.random(rooms.shape) < noise.dropout_prob] = RoomClass.Background
        icons[rng.random(icons.shape) < noise.dropout_prob] = IconClass.Empty
    return SegmentationMaps(rooms, icons), out
