"""Pure numpy implementations of the raster kernels.

Signatures and results match the compiled ``_ckernels`` module exactly
(the Gaussian splat agrees to float32 rounding).
"""

import math

import numpy as np


def fill_polygon(canvas, xs, ys, value):
    """Scanline-fill a polygon into ``canvas`` in place.

    A pixel is painted when its center ``(i, j)`` lies inside the polygon
    under the top-left rule: crossings are taken on half-open edges
    ``[ymin, ymax)`` and spans cover ``xa <= i < xb``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    n = len(xs)
    if n < 3:
        return
    h, w = canvas.shape
    x0, y0 = xs, ys
    x1, y1 = np.roll(xs, -1), np.roll(ys, -1)
    horizontal = y0 == y1
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    row_start = max(0, int(math.ceil(ys.min())))
    row_stop = min(h, int(math.ceil(ys.max())))
    for j in range(row_start, row_stop):
        yj = float(j)
        active = (~horizontal) & (ylo <= yj) & (yhi > yj)
        if not active.any():
            continue
        ax0, ay0, ax1, ay1 = x0[active], y0[active], x1[active], y1[active]
        cross = np.sort(ax0 + (yj - ay0) * (ax1 - ax0) / (ay1 - ay0))
        for k in range(0, len(cross) - 1, 2):
            i0 = max(0, int(math.ceil(cross[k])))
            i1 = min(w, int(math.ceil(cross[k + 1])))
            if i1 > i0:
                canvas[j, i0:i1] = value


def splat_gaussian(channel, cx, cy, sigma, radius):
    """Max-combine ``exp(-d^2 / (2 sigma^2))`` around ``(cx, cy)`` into ``channel``."""
    h, w = channel.shape
    ci, cj = int(math.floor(cx + 0.5)), int(math.floor(cy + 0.5))
    i0, i1 = max(0, ci - radius), min(w, ci + radius + 1)
    j0, j1 = max(0, cj - radius), min(h, cj + radius + 1)
    if i0 >= i1 or j0 >= j1:
        return
    dx = np.arange(i0, i1, dtype=np.float64) - cx
    dy = np.arange(j0, j1, dtype=np.float64) - cy
    d2 = dy[:, None] * dy[:, None] + dx[None, :] * dx[None, :]
    g = np.exp(-d2 / (2.0 * sigma * sigma)).astype(np.float32)
    window = channel[j0:j1, i0:i1]
    np.maximum(window, g, out=window)


def local_maxima(channel, threshold):
    """Row-major ``(rows, cols)`` of pixels >= threshold and >= all 8 neighbours."""
    h, w = channel.shape
    rows, cols = np.nonzero(channel >= np.float32(threshold))
    if rows.size == 0:
        return rows.astype(np.int64), cols.astype(np.int64)
    padded = np.pad(channel, 1, mode="constant", constant_values=-np.inf)
    vals = channel[rows, cols]
    keep = np.ones(rows.size, dtype=bool)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            keep &= vals >= padded[rows + 1 + dj, cols + 1 + di]
    return rows[keep].astype(np.int64), cols[keep].astype(np.int64)


def nms_keep(rows, cols, radius):
    """Greedy suppression over candidates already sorted by descending score.

    Returns indices of survivors in that order.  A candidate is suppressed
    when it lies within ``radius`` (Euclidean, inclusive) of a survivor.
    """
    n = len(rows)
    r = np.asarray(rows, dtype=np.float64)
    c = np.asarray(cols, dtype=np.float64)
    alive = np.ones(n, dtype=bool)
    keep = []
    r2 = float(radius) * float(radius)
    for k in range(n):
        if not alive[k]:
            continue
        keep.append(k)
        d2 = (r[k + 1:] - r[k]) ** 2 + (c[k + 1:] - c[k]) ** 2
        alive[k + 1:] &= d2 > r2
    return np.asarray(keep, dtype=np.int64)


def confusion_matrix(pred, gt, n_classes):
    """``(n, n)`` int64 counts, rows indexed by ground truth, columns by prediction."""
    idx = gt.astype(np.int64).ravel() * n_classes + pred.astype(np.int64).ravel()
    return np.bincount(idx, minlength=n_classes * n_classes).reshape(n_classes, n_classes)
