"""Geometric and semantic vocabulary shared by every floorvec module.

Coordinates are float pixels with the origin at the top-left corner and
``y`` growing downward.  Pixel ``(i, j)`` has its center at ``x=i, y=j``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

# Off-axis difference (px) under which a segment counts as horizontal/vertical.
AXIS_TOL = 3.0
# Dilation (px) applied to wall polygons when testing opening containment.
OPENING_WALL_MARGIN = 2.0


class RoomClass(enum.IntEnum):
    Background = 0
    Outdoor = 1
    Wall = 2
    Kitchen = 3
    LivingRoom = 4
    Bedroom = 5
    Bath = 6
    Hallway = 7
    Railing = 8
    Storage = 9
    Garage = 10
    OtherRooms = 11


class IconClass(enum.IntEnum):
    Empty = 0
    Window = 1
    Door = 2
    Closet = 3
    ElectricalAppliance = 4
    Toilet = 5
    Sink = 6
    SaunaBench = 7
    FirePlace = 8
    Bathtub = 9
    Chimney = 10


OPENING_CLASSES = (IconClass.Window, IconClass.Door)


class Point(NamedTuple):
    x: float
    y: float


class Direction(enum.IntEnum):
    """Compass direction of a wall arm, valued by its angle in degrees.

    North is up on screen, i.e. towards negative ``y``.
    """

    E = 0
    N = 90
    W = 180
    S = 270

    @property
    def vector(self) -> tuple[int, int]:
        return _DIR_VECTORS[self]

    def rotate(self, degrees: int) -> "Direction":
        return Direction((self.value + degrees) % 360)

    @property
    def opposite(self) -> "Direction":
        return self.rotate(180)


_DIR_VECTORS = {
    Direction.E: (1, 0),
    Direction.N: (0, -1),
    Direction.W: (-1, 0),
    Direction.S: (0, 1),
}


def direction_between(a: Point, b: Point) -> Direction:
    """Dominant compass direction of the vector ``a -> b``."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    if abs(dx) >= abs(dy):
        return Direction.E if dx > 0 else Direction.W
    return Direction.S if dy > 0 else Direction.N


# ---------------------------------------------------------------------------
# interest point kinds


@dataclass(frozen=True)
class WallJunction:
    """Junction family I/L/T/X plus orientation in degrees.

    Orientation conventions (arms listed as compass directions):

    * ``I(o)``: the single arm points to ``o``.
    * ``L(o)``: arms ``o`` and ``o + 90``.
    * ``T(o)``: ``o`` is the stem; arms ``o``, ``o + 90`` and ``o - 90``.
    * ``X``: all four arms, orientation is always 0.
    """

    family: str
    orientation: int = 0

    def __post_init__(self):
        if self.family not in ("I", "L", "T", "X"):
            raise ValueError(f"unknown junction family {self.family!r}")
        if self.orientation not in (0, 90, 180, 270):
            raise ValueError(f"bad orientation {self.orientation!r}")
        if self.family == "X" and self.orientation != 0:
            raise ValueError("X junctions have a single orientation (0)")

    @property
    def arms(self) -> frozenset[Direction]:
        o = Direction(self.orientation)
        if self.family == "I":
            return frozenset({o})
        if self.family == "L":
            return frozenset({o, o.rotate(90)})
        if self.family == "T":
            return frozenset({o, o.rotate(90), o.rotate(270)})
        return frozenset(Direction)

    @classmethod
    def from_arms(cls, arms: Iterable[Direction]) -> "WallJunction":
        """Classify a set of incident wall directions.

        Raises ``ValueError`` for two opposite arms (a straight pass-through,
        which is not a junction) and for an empty set.
        """
        arms = frozenset(arms)
        n = len(arms)
        if n == 1:
            (o,) = arms
            return cls("I", o.value)
        if n == 2:
            for o in Direction:
                if arms == {o, o.rotate(90)}:
                    return cls("L", o.value)
            raise ValueError("collinear arms do not form a junction")
        if n == 3:
            for o in Direction:
                if o.rotate(180) not in arms:
                    return cls("T", o.value)
        if n == 4:
            return cls("X")
        raise ValueError("a junction needs at least one arm")


@dataclass(frozen=True)
class IconCorner:
    corner: str

    def __post_init__(self):
        if self.corner not in ICON_CORNERS:
            raise ValueError(f"unknown icon corner {self.corner!r}")


@dataclass(frozen=True)
class OpeningEndpoint:
    """Opening end; ``direction`` points along the opening, towards its other end."""

    direction: str

    def __post_init__(self):
        if self.direction not in OPENING_DIRECTIONS:
            raise ValueError(f"unknown opening direction {self.direction!r}")


Kind = Union[WallJunction, IconCorner, OpeningEndpoint]

ICON_CORNERS = ("NW", "NE", "SW", "SE")
OPENING_DIRECTIONS = ("left", "right", "up", "down")

CHANNEL_KINDS: tuple[Kind, ...] = (
    *(WallJunction(f, o) for f in ("I", "L", "T") for o in (0, 90, 180, 270)),
    WallJunction("X"),
    *(IconCorner(c) for c in ICON_CORNERS),
    *(OpeningEndpoint(d) for d in OPENING_DIRECTIONS),
)
N_CHANNELS = len(CHANNEL_KINDS)
WALL_CHANNELS = range(0, 13)
ICON_CHANNELS = range(13, 17)
OPENING_CHANNELS = range(17, 21)
_CHANNEL_OF = {k: i for i, k in enumerate(CHANNEL_KINDS)}


def channel_index(kind: Kind) -> int:
    return _CHANNEL_OF[kind]


def kind_of_channel(index: int) -> Kind:
    return CHANNEL_KINDS[index]


def kind_name(kind: Kind) -> str:
    if isinstance(kind, WallJunction):
        return "X" if kind.family == "X" else f"{kind.family}{kind.orientation}"
    if isinstance(kind, IconCorner):
        return f"icon_{kind.corner}"
    return f"opening_{kind.direction}"


class InterestPoint(NamedTuple):
    location: Point
    kind: Kind
    score: float = 1.0

    @property
    def channel(self) -> int:
        return channel_index(self.kind)


@dataclass(frozen=True)
class InterestPointSet:
    points: tuple[InterestPoint, ...] = ()

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def of_type(self, cls) -> list[InterestPoint]:
        return [p for p in self.points if isinstance(p.kind, cls)]


# ---------------------------------------------------------------------------
# vector elements


def _as_point(p) -> Point:
    return Point(float(p[0]), float(p[1]))


def is_axis_aligned(a, b, tol: float = AXIS_TOL) -> bool:
    return min(abs(b[0] - a[0]), abs(b[1] - a[1])) <= tol


def segment_rectangle(a: Point, b: Point, width: float) -> tuple[Point, ...]:
    """Rectangle of the given width centred on segment ``a-b``.

    The rectangle is not extended past the endpoints, so its area is
    exactly ``|ab| * width``.  Vertices have positive shoelace orientation.
    """
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    if length == 0:
        raise ValueError("zero-length segment")
    # unit normal; sign chosen so the emitted ring has positive area
    nx, ny = -dy / length * width / 2, dx / length * width / 2
    ring = (
        Point(a[0] - nx, a[1] - ny),
        Point(b[0] - nx, b[1] - ny),
        Point(b[0] + nx, b[1] + ny),
        Point(a[0] + nx, a[1] + ny),
    )
    if signed_area(ring) < 0:
        ring = (ring[0], ring[3], ring[2], ring[1])
    return ring


def signed_area(poly) -> float:
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2.0


@dataclass(frozen=True)
class Wall:
    centerline: tuple[Point, Point]
    width: float

    def __post_init__(self):
        a, b = self.centerline
        object.__setattr__(self, "centerline", (_as_point(a), _as_point(b)))
        object.__setattr__(self, "width", float(self.width))

    @property
    def length(self) -> float:
        (x0, y0), (x1, y1) = self.centerline
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def is_horizontal(self) -> bool:
        (x0, y0), (x1, y1) = self.centerline
        return abs(x1 - x0) >= abs(y1 - y0)

    @property
    def polygon(self) -> tuple[Point, ...]:
        return segment_rectangle(*self.centerline, self.width)


@dataclass(frozen=True)
class Room:
    polygon: tuple[Point, ...]
    label: RoomClass

    def __post_init__(self):
        object.__setattr__(self, "polygon", tuple(_as_point(p) for p in self.polygon))
        object.__setattr__(self, "label", RoomClass(self.label))


@dataclass(frozen=True)
class Icon:
    bbox: tuple[Point, Point]
    label: IconClass

    def __post_init__(self):
        a, b = self.bbox
        lo = Point(float(min(a[0], b[0])), float(min(a[1], b[1])))
        hi = Point(float(max(a[0], b[0])), float(max(a[1], b[1])))
        object.__setattr__(self, "bbox", (lo, hi))
        object.__setattr__(self, "label", IconClass(self.label))

    @property
    def polygon(self) -> tuple[Point, ...]:
        (x0, y0), (x1, y1) = self.bbox
        return (Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1))

    @property
    def corners(self) -> dict[str, Point]:
        (x0, y0), (x1, y1) = self.bbox
        return {"NW": Point(x0, y0), "NE": Point(x1, y0),
                "SW": Point(x0, y1), "SE": Point(x1, y1)}


@dataclass(frozen=True)
class Opening:
    segment: tuple[Point, Point]
    width: float
    label: IconClass

    def __post_init__(self):
        a, b = self.segment
        object.__setattr__(self, "segment", (_as_point(a), _as_point(b)))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "label", IconClass(self.label))

    @property
    def polygon(self) -> tuple[Point, ...]:
        return segment_rectangle(*self.segment, self.width)


@dataclass(frozen=True)
class FloorplanModel:
    image_size: tuple[int, int]
    walls: tuple[Wall, ...] = ()
    rooms: tuple[Room, ...] = ()
    icons: tuple[Icon, ...] = ()
    openings: tuple[Opening, ...] = ()

    def __post_init__(self):
        w, h = self.image_size
        object.__setattr__(self, "image_size", (int(w), int(h)))
        for name in ("walls", "rooms", "icons", "openings"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    invariant: str
    element: str

    def __str__(self):
        return f"{self.element}: {self.invariant}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, invariant: str, element: str):
        self.violations.append(Violation(invariant, element))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __bool__(self):
        return bool(self.violations)


def point_in_polygon(p, poly, margin: float = 0.0) -> bool:
    """Inside test for a convex or concave polygon, boundary inclusive.

    ``margin`` > 0 accepts points within that distance of the boundary.
    """
    x, y = p
    inside = False
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if _dist_point_segment(x, y, x0, y0, x1, y1) <= margin + 1e-9:
            return True
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xc:
                inside = not inside
    return inside


def _dist_point_segment(px, py, x0, y0, x1, y1) -> float:
    dx, dy = x1 - x0, y1 - y0
    seg2 = dx * dx + dy * dy
    t = 0.0 if seg2 == 0 else max(0.0, min(1.0, ((px - x0) * dx + (py - y0) * dy) / seg2))
    return math.hypot(px - (x0 + t * dx), py - (y0 + t * dy))


def _in_frame(points, size) -> bool:
    w, h = size
    return all(0 <= x <= w and 0 <= y <= h and math.isfinite(x) and math.isfinite(y)
               for x, y in points)


def _is_simple(poly) -> bool:
    n = len(poly)
    segs = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(*segs[i], *segs[j]):
                return False
    return True


def _segments_intersect(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    def on_seg(p, q, r):
        return (min(p[0], r[0]) - 1e-12 <= q[0] <= max(p[0], r[0]) + 1e-12
                and min(p[1], r[1]) - 1e-12 <= q[1] <= max(p[1], r[1]) + 1e-12)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(a, c, b)) or (o2 == 0 and on_seg(a, d, b))
            or (o3 == 0 and on_seg(c, a, d)) or (o4 == 0 and on_seg(c, b, d)))


def validate_model(model: FloorplanModel) -> ValidationReport:
    """Check every type invariant; violations are returned, never raised."""
    report = ValidationReport()
    size = model.image_size
    if size[0] <= 0 or size[1] <= 0:
        report.add("image size not positive", "image_size")

    for i, wall in enumerate(model.walls):
        tag = f"walls[{i}]"
        a, b = wall.centerline
        if not (wall.width > 0 and math.isfinite(wall.width)):
            report.add("wall width not positive", tag)
            continue
        if wall.length == 0:
            report.add("wall has zero length", tag)
            continue
        if not is_axis_aligned(a, b):
            report.add("wall centerline not axis-aligned", tag)
        if not _in_frame(wall.polygon, size):
            report.add("wall outside image frame", tag)

    for i, room in enumerate(model.rooms):
        tag = f"rooms[{i}]"
        poly = room.polygon
        if room.label in (RoomClass.Background, RoomClass.Wall):
            report.add("room label is Background or Wall", tag)
        if len(poly) < 4:
            report.add("room has fewer than 4 vertices", tag)
            continue
        if not all(is_axis_aligned(poly[k], poly[(k + 1) % len(poly)])
                   for k in range(len(poly))):
            report.add("room edge not axis-aligned", tag)
        if not _is_simple(poly):
            report.add("room polygon not simple", tag)
        if signed_area(poly) <= 0:
            report.add("room polygon not counter-clockwise", tag)
        if not _in_frame(poly, size):
            report.add("room outside image frame", tag)

    for i, icon in enumerate(model.icons):
        tag = f"icons[{i}]"
        (x0, y0), (x1, y1) = icon.bbox
        if not (x1 > x0 and y1 > y0):
            report.add("icon has no area", tag)
        if icon.label == IconClass.Empty or icon.label in OPENING_CLASSES:
            report.add("icon label is Empty or an opening class", tag)
        if not _in_frame(icon.bbox, size):
            report.add("icon outside image frame", tag)

    for i, op in enumerate(model.openings):
        tag = f"openings[{i}]"
        a, b = op.segment
        if op.label not in OPENING_CLASSES:
            report.add("opening label not Window or Door", tag)
        if not (op.width > 0 and math.isfinite(op.width)):
            report.add("opening width not positive", tag)
            continue
        if a == b:
            report.add("opening has zero length", tag)
            continue
        if not is_axis_aligned(a, b):
            report.add("opening not axis-aligned", tag)
        if not _in_frame((a, b), size):
            report.add("opening outside image frame", tag)
        if not any(point_in_polygon(a, w.polygon, OPENING_WALL_MARGIN)
                   and point_in_polygon(b, w.polygon, OPENING_WALL_MARGIN)
                   for w in model.walls if w.width > 0 and w.length > 0):
            report.add("opening outside walls", tag)
    return report
