"""Detection and segmentation scores, dataset statistics and report writers."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon

from . import kernels
from .core import FloorplanModel, IconClass, RoomClass, WallJunction
from .errors import InvalidLabel, ShapeMismatch
from .raster import wall_junctions

MIN_JUNCTION_TOL = 4.0
JUNCTION_TOL_FRACTION = 0.005
DEFAULT_IOU = 0.5
CATEGORIES = ("junction", "opening", "icon", "room")


def _ratio(num: int, den: int) -> float:
    return 1.0 if den == 0 else num / den


@dataclass(frozen=True)
class DetectionConfig:
    junction_tol: float | None = None  # None: max(4 px, 0.5% of the image diagonal)
    iou_threshold: float = DEFAULT_IOU

    def tolerance(self, image_size) -> float:
        if self.junction_tol is not None:
            return float(self.junction_tol)
        return max(MIN_JUNCTION_TOL, JUNCTION_TOL_FRACTION * math.hypot(*image_size))


@dataclass(frozen=True)
class CategoryScore:
    n_pred: int
    n_gt: int
    matches: tuple[tuple[int, int, float], ...]  # (pred index, gt index, distance or IoU)

    @property
    def acc(self) -> float:
        return _ratio(len(self.matches), self.n_pred)

    @property
    def recall(self) -> float:
        return _ratio(len(self.matches), self.n_gt)


@dataclass(frozen=True)
class DetectionReport:
    categories: dict

    def __getitem__(self, name) -> CategoryScore:
        return self.categories[name]

    def to_dict(self) -> dict:
        return {name: {"acc": s.acc, "recall": s.recall, "n_pred": s.n_pred, "n_gt": s.n_gt,
                       "matches": [list(m) for m in s.matches]}
                for name, s in self.categories.items()}


def _greedy(cands, n_pred, n_gt):
    # cands: (sort key, pred, gt, score); sort keys are symmetric in the two sides
    cands.sort(key=lambda c: c[0])
    used_p, used_g = set(), set()
    out = []
    for _, p, g, score in cands:
        if p in used_p or g in used_g:
            continue
        used_p.add(p)
        used_g.add(g)
        out.append((p, g, score))
    out.sort()
    return CategoryScore(n_pred, n_gt, tuple(out))


def match_points(pred, gt, tol: float) -> CategoryScore:
    """One-to-one greedy matching of same-kind points, nearest first, within ``tol``."""
    cands = []
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            if p.kind != g.kind:
                continue
            d = math.dist(p.location, g.location)
            if d <= tol:
                a = (p.location.x, p.location.y)
                b = (g.location.x, g.location.y)
                cands.append(((d, min(a, b), max(a, b)), i, j, d))
    return _greedy(cands, len(pred), len(gt))


def polygon_iou(a, b) -> float:
    pa, pb = Polygon(a), Polygon(b)
    union = pa.union(pb).area
    return 0.0 if union == 0 else pa.intersection(pb).area / union


def match_regions(pred, gt, threshold: float = DEFAULT_IOU) -> CategoryScore:
    """One-to-one greedy matching of same-label ``(polygon, label)`` pairs by IoU."""
    cands = []
    for i, (pp, pl) in enumerate(pred):
        for j, (gp, gl) in enumerate(gt):
            if pl != gl:
                continue
            iou = polygon_iou(pp, gp)
            if iou >= threshold:
                a, b = tuple(map(tuple, pp)), tuple(map(tuple, gp))
                cands.append(((-iou, min(a, b), max(a, b)), i, j, iou))
    return _greedy(cands, len(pred), len(gt))


def _junction_points(model, points):
    if points is None:
        return wall_junctions(model.walls)
    return [p for p in points if isinstance(p.kind, WallJunction)]


def detection_metrics(pred: FloorplanModel, gt: FloorplanModel, pred_points=None,
                      gt_points=None, config: DetectionConfig = DetectionConfig()) -> DetectionReport:
    """Per-category precision ("acc") and recall against a ground truth.

    Junctions come from the given interest points, or are derived from the
    walls when none are given.  Regions match on polygon IoU and label.
    """
    if tuple(pred.image_size) != tuple(gt.image_size):
        raise ShapeMismatch(f"image sizes differ: {pred.image_size} vs {gt.image_size}")
    tol = config.tolerance(gt.image_size)
    thr = config.iou_threshold
    return DetectionReport({
        "junction": match_points(_junction_points(pred, pred_points),
                                 _junction_points(gt, gt_points), tol),
        "opening": match_regions([(o.polygon, o.label) for o in pred.openings],
                                 [(o.polygon, o.label) for o in gt.openings], thr),
        "icon": match_regions([(i.polygon, i.label) for i in pred.icons],
                              [(i.polygon, i.label) for i in gt.icons], thr),
        "room": match_regions([(r.polygon, r.label) for r in pred.rooms],
                              [(r.polygon, r.label) for r in gt.rooms], thr),
    })


@dataclass(frozen=True)
class SegReport:
    overall_acc: float
    mean_acc: float
    mean_iou: float
    per_class_acc: np.ndarray   # NaN for classes absent from both rasters
    per_class_iou: np.ndarray
    confusion: np.ndarray       # rows: ground truth, columns: prediction

    @property
    def counted(self) -> np.ndarray:
        return ~np.isnan(self.per_class_acc)

    def to_dict(self) -> dict:
        def clean(arr):
            return [None if math.isnan(v) else float(v) for v in arr]
        return {"overall_acc": self.overall_acc, "mean_acc": self.mean_acc,
                "mean_iou": self.mean_iou, "per_class_acc": clean(self.per_class_acc),
                "per_class_iou": clean(self.per_class_iou),
                "confusion": self.confusion.tolist()}


def confusion_matrix(pred, gt, n_classes: int) -> np.ndarray:
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and ground truth {gt.shape} differ")
    for name, arr in (("prediction", pred), ("ground truth", gt)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise InvalidLabel(f"{name} holds codes outside [0, {n_classes})")
    return kernels.confusion_matrix(np.ascontiguousarray(pred, dtype=np.int64).reshape(-1),
                                    np.ascontiguousarray(gt, dtype=np.int64).reshape(-1),
                                    int(n_classes))


def segmentation_metrics(pred, gt, n_classes: int) -> SegReport:
    """Pixel accuracy, class-mean accuracy and class-mean IoU.

    Class means cover classes present in either raster; a class predicted
    but absent from the ground truth scores accuracy 0.
    """
    cm = confusion_matrix(pred, gt, n_classes).astype(np.int64)
    tp = np.diag(cm)
    gt_c = cm.sum(axis=1)
    pred_c = cm.sum(axis=0)
    counted = (gt_c + pred_c) > 0
    acc = np.full(n_classes, np.nan)
    iou = np.full(n_classes, np.nan)
    for c in np.nonzero(counted)[0]:
        acc[c] = tp[c] / gt_c[c] if gt_c[c] else 0.0
        iou[c] = tp[c] / (gt_c[c] + pred_c[c] - tp[c])
    total = int(cm.sum())
    overall = _ratio(int(tp.sum()), total)
    if counted.any():
        # fsum: correctly rounded, so the means do not depend on summation order
        n = int(counted.sum())
        mean_acc = math.fsum(acc[counted].tolist()) / n
        mean_iou = math.fsum(iou[counted].tolist()) / n
    else:
        mean_acc = mean_iou = 1.0
    return SegReport(overall, mean_acc, mean_iou, acc, iou, cm)


@dataclass(frozen=True)
class DatasetStats:
    n_images: int = 0
    totals: dict = field(default_factory=dict)
    room_classes: tuple = ()      # ranked (name, count)
    icon_classes: tuple = ()
    opening_classes: tuple = ()
    histograms: dict = field(default_factory=dict)   # category -> {instances: images}
    resolutions: tuple = ()

    def to_dict(self) -> dict:
        return {"n_images": self.n_images, "totals": dict(self.totals),
                "room_classes": [list(e) for e in self.room_classes],
                "icon_classes": [list(e) for e in self.icon_classes],
                "opening_classes": [list(e) for e in self.opening_classes],
                "histograms": {k: {str(n): c for n, c in v.items()}
                               for k, v in self.histograms.items()},
                "resolutions": [list(r) for r in self.resolutions]}


def _ranked(counter: Counter, enum):
    items = sorted(counter.items(), key=lambda kv: (-kv[1], int(kv[0])))
    return tuple((enum(k).name, n) for k, n in items)


def dataset_stats(models) -> DatasetStats:
    """Totals, ranked class frequencies, per-image instance histograms, resolutions.

    Class rankings list classes with at least one instance, most frequent
    first, ties by class code.
    """
    models = list(models)
    rooms, icons, openings = Counter(), Counter(), Counter()
    hist = {"rooms": Counter(), "icons": Counter(), "walls": Counter(), "openings": Counter()}
    for m in models:
        rooms.update(int(r.label) for r in m.rooms)
        icons.update(int(i.label) for i in m.icons)
        openings.update(int(o.label) for o in m.openings)
        hist["rooms"][len(m.rooms)] += 1
        hist["icons"][len(m.icons)] += 1
        hist["walls"][len(m.walls)] += 1
        hist["openings"][len(m.openings)] += 1
    totals = {"images": len(models), "rooms": sum(rooms.values()), "icons": sum(icons.values()),
              "walls": sum(len(m.walls) for m in models), "openings": sum(openings.values())}
    return DatasetStats(
        n_images=len(models),
        totals=totals,
        room_classes=_ranked(rooms, RoomClass),
        icon_classes=_ranked(icons, IconClass),
        opening_classes=_ranked(openings, IconClass),
        histograms={k: dict(sorted(v.items())) for k, v in hist.items()},
        resolutions=tuple(tuple(int(v) for v in m.image_size) for m in models),
    )


def class_names(n_classes: int) -> list[str]:
    for enum in (RoomClass, IconClass):
        if n_classes == len(enum):
            return [c.name for c in enum]
    return [f"class_{k}" for k in range(n_classes)]


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6f}"


def detection_csv(report: DetectionReport) -> str:
    """Rows per category with acc and recall columns."""
    return _csv([["category", "acc", "recall"]]
                + [[name, _num(s.acc), _num(s.recall)] for name, s in report.categories.items()])


def segmentation_summary_csv(reports: dict) -> str:
    """One row per task (e.g. rooms, icons) with the three summary scores."""
    rows = [["task", "overall_acc", "mean_acc", "mean_iou"]]
    rows += [[task, _num(r.overall_acc), _num(r.mean_acc), _num(r.mean_iou)]
             for task, r in reports.items()]
    return _csv(rows)


def segmentation_classes_csv(report: SegReport, names=None) -> str:
    """One row per class with IoU and accuracy; blank cells for absent classes."""
    names = names or class_names(len(report.per_class_iou))
    rows = [["class", "iou", "acc"]]
    rows += [[n, _num(float(i)), _num(float(a))]
             for n, i, a in zip(names, report.per_class_iou, report.per_class_acc)]
    return _csv(rows)


def stats_csv(stats: DatasetStats) -> dict[str, str]:
    """CSV series keyed by file stem: totals, class ranks, histograms, resolutions."""
    out = {"totals": _csv([["quantity", "count"]] + [[k, v] for k, v in stats.totals.items()])}
    for key in ("room_classes", "icon_classes", "opening_classes"):
        out[key] = _csv([["rank", "class", "count"]]
                        + [[k + 1, n, c] for k, (n, c) in enumerate(getattr(stats, key))])
    out["histograms"] = _csv([["category", "instances", "images"]]
                             + [[cat, n, c] for cat, h in stats.histograms.items()
                                for n, c in h.items()])
    out["resolutions"] = _csv([["width", "height"]] + [list(r) for r in stats.resolutions])
    return out


def to_json(obj) -> str:
    return json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj, indent=2, sort_keys=True)


__all__ = [
    "CATEGORIES", "CategoryScore", "DatasetStats", "DetectionConfig", "DetectionReport",
    "SegReport", "class_names", "confusion_matrix", "dataset_stats", "detection_csv",
    "detection_metrics", "match_points", "match_regions", "polygon_iou",
    "segmentation_classes_csv", "segmentation_metrics", "segmentation_summary_csv",
    "stats_csv", "to_json",
]
