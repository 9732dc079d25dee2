"""Annotation SVG and ``fpv-1`` JSON readers and writers.

SVG subset (one ``<polygon>`` per element, ``<g>`` groups are traversed)::

    <svg width="W" height="H">
      <polygon class="Wall" data-width="4" data-centerline="x1,y1 x2,y2" points="..."/>
      <polygon class="Space Kitchen" points="..."/>
      <polygon class="FixedFurniture Toilet" points="..."/>
      <polygon class="Door" data-width="4" data-segment="x1,y1 x2,y2" points="..."/>
    </svg>

Anything else is reported as a warning rather than dropped silently.
"""

from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import NamedTuple

from .core import (
    OPENING_CLASSES,
    FloorplanModel,
    Icon,
    IconClass,
    Opening,
    Point,
    Room,
    RoomClass,
    Wall,
    signed_area,
    validate_model,
)
from .errors import BadPointList, FormatError, InvalidModel, MalformedXml, MissingViewport

SCHEMA = "fpv-1"
SVG_NS = "http://www.w3.org/2000/svg"
_SPLIT = re.compile(r"[\s,]+")
_CONTAINERS = {"g"}


@dataclass(frozen=True)
class AnnotationDocument:
    text: str
    width: int
    height: int


class ParsedAnnotation(NamedTuple):
    model: FloorplanModel
    warnings: list


def fmt_number(v: float) -> str:
    """Shortest decimal that round-trips; integral values drop the fraction."""
    v = float(v)
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def _json_number(v: float):
    v = float(v)
    if v.is_integer() and abs(v) < 2 ** 53:
        return int(v)
    return v


# ---------------------------------------------------------------------------
# SVG parsing


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


def _parse_length(text):
    if text is None:
        return None
    text = text.strip()
    if text.endswith("px"):
        text = text[:-2]
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) and v > 0 else None


def _parse_points(text, index) -> list[Point]:
    if text is None:
        raise BadPointList(index, "")
    tokens = [t for t in _SPLIT.split(text.strip()) if t]
    if len(tokens) < 4 or len(tokens) % 2:
        raise BadPointList(index, text)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise BadPointList(index, text) from None
    if not all(math.isfinite(v) for v in vals):
        raise BadPointList(index, text)
    pts = [Point(vals[k], vals[k + 1]) for k in range(0, len(vals), 2)]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    return pts


def _parse_number(el, attr, index):
    text = el.get(attr)
    if text is None:
        return None
    try:
        v = float(text)
    except ValueError:
        raise BadPointList(index, text) from None
    if not math.isfinite(v):
        raise BadPointList(index, text)
    return v


def _axis_segment(points):
    """Centre segment and short-side length of an axis-aligned rectangle."""
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 - x0 >= y1 - y0:
        ym = (y0 + y1) / 2
        return (Point(x0, ym), Point(x1, ym)), y1 - y0
    xm = (x0 + x1) / 2
    return (Point(xm, y0), Point(xm, y1)), x1 - x0


def _segment_attr(el, attr, index):
    text = el.get(attr)
    if text is None:
        return None
    pts = _parse_points_pair(text, index)
    return pts


def _parse_points_pair(text, index):
    tokens = [t for t in _SPLIT.split(text.strip()) if t]
    if len(tokens) != 4:
        raise BadPointList(index, text)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise BadPointList(index, text) from None
    if not all(math.isfinite(v) for v in vals):
        raise BadPointList(index, text)
    return (Point(vals[0], vals[1]), Point(vals[2], vals[3]))


def _ccw(points):
    if signed_area(points) < 0:
        return [points[0]] + points[:0:-1]
    return points


def parse_annotation(doc) -> ParsedAnnotation:
    """Parse an annotation SVG (``AnnotationDocument``, str or bytes).

    Returns the model together with one warning string per unrecognized
    element.
    """
    text = doc.text if isinstance(doc, AnnotationDocument) else doc
    try:
        root = ET.fromstring(text)
    except (ET.ParseError, ValueError, TypeError) as exc:
        raise MalformedXml(str(exc)) from None
    if _local(root.tag) != "svg":
        raise MalformedXml(f"root element is <{_local(root.tag)}>, expected <svg>")

    width = _parse_length(root.get("width"))
    height = _parse_length(root.get("height"))
    if (width is None or height is None) and root.get("viewBox"):
        try:
            vb = [float(t) for t in _SPLIT.split(root.get("viewBox").strip()) if t]
            if len(vb) == 4 and vb[2] > 0 and vb[3] > 0:
                width, height = width or vb[2], height or vb[3]
        except ValueError:
            pass
    if width is None or height is None:
        raise MissingViewport("svg root needs positive width and height")

    walls, rooms, icons, openings, warnings = [], [], [], [], []
    counter = [0]

    def visit(parent):
        for el in parent:
            index = counter[0]
            counter[0] += 1
            tag = _local(el.tag)
            if tag in _CONTAINERS:
                visit(el)
                continue
            if tag != "polygon":
                warnings.append(f"element {index}: unrecognized <{tag}>")
                continue
            classes = (el.get("class") or "").split()
            if not classes:
                warnings.append(f"element {index}: polygon without class")
                continue
            head, rest = classes[0], "".join(classes[1:])
            if head == "Wall":
                pts = _parse_points(el.get("points"), index)
                centerline = _segment_attr(el, "data-centerline", index)
                w = _parse_number(el, "data-width", index)
                if centerline is None or w is None:
                    seg, short = _axis_segment(pts)
                    centerline = centerline or seg
                    w = short if w is None else w
                walls.append(Wall(centerline, w))
            elif head == "Space":
                pts = _parse_points(el.get("points"), index)
                try:
                    label = RoomClass[rest]
                except KeyError:
                    label = RoomClass.OtherRooms
                if label in (RoomClass.Background, RoomClass.Wall):
                    label = RoomClass.OtherRooms
                rooms.append(Room(tuple(_ccw(pts)), label))
            elif head == "FixedFurniture":
                pts = _parse_points(el.get("points"), index)
                label = IconClass.__members__.get(rest)
                if label is None or label == IconClass.Empty or label in OPENING_CLASSES:
                    warnings.append(f"element {index}: unknown icon class {rest!r}")
                    continue
                xs = [p.x for p in pts]
                ys = [p.y for p in pts]
                icons.append(Icon((Point(min(xs), min(ys)), Point(max(xs), max(ys))), label))
            elif head in ("Window", "Door") and len(classes) == 1:
                pts = _parse_points(el.get("points"), index)
                segment = _segment_attr(el, "data-segment", index)
                w = _parse_number(el, "data-width", index)
                if segment is None or w is None:
                    seg, short = _axis_segment(pts)
                    segment = segment or seg
                    w = short if w is None else w
                openings.append(Opening(segment, w, IconClass[head]))
            else:
                warnings.append(f"element {index}: unrecognized class {' '.join(classes)!r}")

    visit(root)
    size = (int(math.ceil(width)), int(math.ceil(height)))
    model = FloorplanModel(size, tuple(walls), tuple(rooms), tuple(icons), tuple(openings))
    return ParsedAnnotation(model, warnings)


# ---------------------------------------------------------------------------
# SVG writing


def _points_attr(points) -> str:
    return " ".join(f"{fmt_number(x)},{fmt_number(y)}" for x, y in points)


def _require_valid(model):
    report = validate_model(model)
    if report:
        raise InvalidModel(report)


def write_annotation(model: FloorplanModel, strict: bool = True) -> AnnotationDocument:
    """Serialize to the annotation SVG subset; ``strict`` refuses invalid models."""
    if strict:
        _require_valid(model)
    w, h = model.image_size
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{SVG_NS}" width="{w}" height="{h}">',
    ]
    for wall in model.walls:
        lines.append(
            f'  <polygon class="Wall" data-width="{fmt_number(wall.width)}" '
            f'data-centerline="{_points_attr(wall.centerline)}" '
            f'points="{_points_attr(wall.polygon)}"/>'
        )
    for room in model.rooms:
        lines.append(f'  <polygon class="Space {room.label.name}" '
                     f'points="{_points_attr(room.polygon)}"/>')
    for icon in model.icons:
        lines.append(f'  <polygon class="FixedFurniture {icon.label.name}" '
                     f'points="{_points_attr(icon.polygon)}"/>')
    for op in model.openings:
        lines.append(
            f'  <polygon class="{op.label.name}" data-width="{fmt_number(op.width)}" '
            f'data-segment="{_points_attr(op.segment)}" '
            f'points="{_points_attr(op.polygon)}"/>'
        )
    lines.append("</svg>")
    return AnnotationDocument("\n".join(lines) + "\n", w, h)


# ---------------------------------------------------------------------------
# fpv-1 JSON


def _pt(p):
    return [_json_number(p[0]), _json_number(p[1])]


def model_to_dict(model: FloorplanModel) -> dict:
    return {
        "schema": SCHEMA,
        "image_size": [model.image_size[0], model.image_size[1]],
        "walls": [{"centerline": [_pt(p) for p in w.centerline],
                   "width": _json_number(w.width)} for w in model.walls],
        "rooms": [{"label": r.label.name, "polygon": [_pt(p) for p in r.polygon]}
                  for r in model.rooms],
        "icons": [{"label": i.label.name, "bbox": [_pt(p) for p in i.bbox]}
                  for i in model.icons],
        "openings": [{"label": o.label.name, "segment": [_pt(p) for p in o.segment],
                      "width": _json_number(o.width)} for o in model.openings],
    }


def model_from_dict(data: dict) -> FloorplanModel:
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise FormatError(f"expected a {SCHEMA} document")
    try:
        w, h = data["image_size"]
        walls = [Wall(tuple(map(tuple, e["centerline"])), e["width"]) for e in data["walls"]]
        rooms = [Room(tuple(map(tuple, e["polygon"])), RoomClass[e["label"]])
                 for e in data["rooms"]]
        icons = [Icon(tuple(map(tuple, e["bbox"])), IconClass[e["label"]])
                 for e in data["icons"]]
        openings = [Opening(tuple(map(tuple, e["segment"])), e["width"], IconClass[e["label"]])
                    for e in data["openings"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed {SCHEMA} document: {exc!r}") from None
    return FloorplanModel((w, h), walls, rooms, icons, openings)


def serialize_model(model: FloorplanModel, format: str = "json", strict: bool = True) -> str:
    if format == "svg":
        return write_annotation(model, strict).text
    if format != "json":
        raise ValueError(f"unknown format {format!r}")
    if strict:
        _require_valid(model)
    return json.dumps(model_to_dict(model), separators=(",", ":"))


def parse_model(text: str, format: str | None = None) -> FloorplanModel:
    """Inverse of ``serialize_model``; ``format`` is sniffed when omitted."""
    if format is None:
        format = "json" if text.lstrip().startswith("{") else "svg"
    if format == "svg":
        return parse_annotation(text).model
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(str(exc)) from None
    return model_from_dict(data)


def load_model(path) -> FloorplanModel:
    from pathlib import Path

    return parse_model(Path(path).read_text(encoding="utf-8"))
