"""Heatmap peak extraction with greedy non-maximum suppression."""

import numpy as np

from .. import kernels
from ..core import InterestPoint, InterestPointSet, Point, kind_of_channel

DEFAULT_THRESHOLD = 0.4
DEFAULT_NMS_RADIUS = 5.0


def refine_centroid(channel: np.ndarray, row: int, col: int) -> Point:
    """Centroid of the 3x3 window around ``(row, col)``, weighted by value above the window minimum.

    Removing the window's flat pedestal keeps broad Gaussians from pulling
    the estimate onto the integer pixel.
    """
    h, w = channel.shape
    r0, r1 = max(0, row - 1), min(h, row + 2)
    c0, c1 = max(0, col - 1), min(w, col + 2)
    win = channel[r0:r1, c0:c1].astype(np.float64)
    win -= win.min()
    total = win.sum()
    if total <= 0:
        return Point(float(col), float(row))
    dr = np.arange(r0, r1, dtype=np.float64) - row
    dc = np.arange(c0, c1, dtype=np.float64) - col
    off_r = (win.sum(axis=1) * dr).sum() / total
    off_c = (win.sum(axis=0) * dc).sum() / total
    return Point(col + float(off_c), row + float(off_r))


def detect_peaks(stack: np.ndarray, threshold: float = DEFAULT_THRESHOLD,
                 nms_radius: float = DEFAULT_NMS_RADIUS) -> InterestPointSet:
    """Local maxima per channel, thresholded, suppressed and refined.

    Candidates are visited in descending value (row-major order breaks
    ties); each survivor suppresses every candidate within ``nms_radius``.
    Points come out channel by channel, strongest first.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if nms_radius < 1:
        raise ValueError("nms_radius must be >= 1")
    stack = np.asarray(stack, dtype=np.float32)
    out = []
    for ch in range(stack.shape[0]):
        channel = np.ascontiguousarray(stack[ch])
        rows, cols = kernels.local_maxima(channel, float(threshold))
        if rows.size == 0:
            continue
        vals = channel[rows, cols]
        # lexsort: last key is primary; rows/cols are already row-major
        order = np.lexsort((np.arange(rows.size), -vals.astype(np.float64)))
        rows, cols, vals = rows[order], cols[order], vals[order]
        keep = kernels.nms_keep(rows, cols, float(nms_radius))
        kind = kind_of_channel(ch)
        for k in keep:
            loc = refine_centroid(channel, int(rows[k]), int(cols[k]))
            out.append(InterestPoint(loc, kind, float(vals[k])))
    return InterestPointSet(tuple(out))
