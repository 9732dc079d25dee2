# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled raster kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, exp, floor

cnp.import_array()


def fill_polygon(unsigned char[:, :] canvas, xs, ys, int value):
    cdef double[:] vx = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[:] vy = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = vx.shape[0]
    if n < 3:
        return
    cdef Py_ssize_t h = canvas.shape[0], w = canvas.shape[1]
    cdef double ymin = vy[0], ymax = vy[0]
    cdef Py_ssize_t k, m, j, i, i0, i1, ncross, a, b
    for k in range(n):
        if vy[k] < ymin:
            ymin = vy[k]
        if vy[k] > ymax:
            ymax = vy[k]
    cdef Py_ssize_t row_start = <Py_ssize_t>ceil(ymin)
    cdef Py_ssize_t row_stop = <Py_ssize_t>ceil(ymax)
    if row_start < 0:
        row_start = 0
    if row_stop > h:
        row_stop = h
    cdef double[:] cross = np.empty(n, dtype=np.float64)
    cdef double yj, x0, y0, x1, y1, t, lo, hi
    cdef unsigned char v = <unsigned char>value
    for j in range(row_start, row_stop):
        yj = <double>j
        ncross = 0
        for k in range(n):
            x0 = vx[k]
            y0 = vy[k]
            x1 = vx[(k + 1) % n]
            y1 = vy[(k + 1) % n]
            if y0 == y1:
                continue
            lo = y0 if y0 < y1 else y1
            hi = y1 if y0 < y1 else y0
            if lo <= yj and hi > yj:
                cross[ncross] = x0 + (yj - y0) * (x1 - x0) / (y1 - y0)
                ncross += 1
        # insertion sort; polygons here have few edges
        for a in range(1, ncross):
            t = cross[a]
            b = a - 1
            while b >= 0 and cross[b] > t:
                cross[b + 1] = cross[b]
                b -= 1
            cross[b + 1] = t
        m = 0
        while m + 1 < ncross:
            i0 = <Py_ssize_t>ceil(cross[m])
            i1 = <Py_ssize_t>ceil(cross[m + 1])
            if i0 < 0:
                i0 = 0
            if i1 > w:
                i1 = w
            for i in range(i0, i1):
                canvas[j, i] = v
            m += 2


def splat_gaussian(float[:, :] channel, double cx, double cy, double sigma, int radius):
    cdef Py_ssize_t h = channel.shape[0], w = channel.shape[1]
    cdef Py_ssize_t ci = <Py_ssize_t>floor(cx + 0.5), cj = <Py_ssize_t>floor(cy + 0.5)
    cdef Py_ssize_t i0 = ci - radius, i1 = ci + radius + 1
    cdef Py_ssize_t j0 = cj - radius, j1 = cj + radius + 1
    if i0 < 0:
        i0 = 0
    if j0 < 0:
        j0 = 0
    if i1 > w:
        i1 = w
    if j1 > h:
        j1 = h
    cdef double denom = 2.0 * sigma * sigma
    cdef double dx, dy
    cdef float g
    cdef Py_ssize_t i, j
    for j in range(j0, j1):
        dy = <double>j - cy
        for i in range(i0, i1):
            dx = <double>i - cx
            g = <float>exp(-(dy * dy + dx * dx) / denom)
            if g > channel[j, i]:
                channel[j, i] = g


def local_maxima(float[:, :] channel, double threshold):
    cdef Py_ssize_t h = channel.shape[0], w = channel.shape[1]
    cdef Py_ssize_t i, j, di, dj, ii, jj, count = 0
    cdef float v
    cdef float thr = <float>threshold
    cdef bint ok
    rows_buf = []
    cols_buf = []
    for j in range(h):
        for i in range(w):
            v = channel[j, i]
            if v < thr:
                continue
            ok = True
            for dj in range(-1, 2):
                jj = j + dj
                if jj < 0 or jj >= h:
                    continue
                for di in range(-1, 2):
                    ii = i + di
                    if ii < 0 or ii >= w or (di == 0 and dj == 0):
                        continue
                    if channel[jj, ii] > v:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                rows_buf.append(j)
                cols_buf.append(i)
    return np.asarray(rows_buf, dtype=np.int64), np.asarray(cols_buf, dtype=np.int64)


def nms_keep(rows, cols, double radius):
    cdef cnp.int64_t[:] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef cnp.int64_t[:] c = np.ascontiguousarray(cols, dtype=np.int64)
    cdef Py_ssize_t n = r.shape[0], k, m, nkeep = 0
    cdef cnp.int64_t[:] keep = np.empty(n, dtype=np.int64)
    cdef double r2 = radius * radius, dr, dc
    cdef bint alive
    for k in range(n):
        alive = True
        for m in range(nkeep):
            dr = <double>(r[k] - r[keep[m]])
            dc = <double>(c[k] - c[keep[m]])
            if dr * dr + dc * dc <= r2:
                alive = False
                break
        if alive:
            keep[nkeep] = k
            nkeep += 1
    return np.asarray(keep[:nkeep]).copy()


def confusion_matrix(pred, gt, int n_classes):
    cdef cnp.int64_t[:] p = np.ascontiguousarray(pred, dtype=np.int64).ravel()
    cdef cnp.int64_t[:] g = np.ascontiguousarray(gt, dtype=np.int64).ravel()
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    cdef cnp.int64_t[:, :] cm = out
    cdef Py_ssize_t k
    for k in range(p.shape[0]):
        cm[g[k], p[k]] += 1
    return out
