# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: flat-kernel mean-shift iteration, nearest-mode lookup and
rod rasterization.  Mirrors ``_pykernels`` exactly in semantics."""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport ceil, floor, sqrt
from libc.stdlib cimport free, malloc


cdef Py_ssize_t _gather(const double[:, ::1] pts, const double[::1] center, double r2,
                        Py_ssize_t* cand) noexcept nogil:
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t i, k, m = 0
    cdef double dist2, diff
    for i in range(n):
        dist2 = 0.0
        for k in range(d):
            diff = pts[i, k] - center[k]
            dist2 = dist2 + diff * diff
        if dist2 <= r2:
            cand[m] = i
            m = m + 1
    return m


cdef void _shift_one(const double[:, ::1] pts, double[:, ::1] modes, double[:, ::1] sums,
                     double[:, ::1] anchors, const double[:, ::1] known, double stop2,
                     Py_ssize_t s, double bw, double tol2, int max_iters) noexcept nogil:
    # Neighbours are searched among points within 2*bw of an anchor position;
    # exact while the mode stays within bw of the anchor (triangle inequality).
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t i, j, k, m, q
    cdef int it
    cdef double dist2, diff, disp2, mean, drift2
    cdef double bw2 = bw * bw
    cdef long count
    cdef Py_ssize_t* cand = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    if cand == NULL:
        return
    for k in range(d):
        anchors[s, k] = modes[s, k]
    m = _gather(pts, anchors[s], 4.0 * bw2, cand)
    for it in range(max_iters):
        drift2 = 0.0
        for k in range(d):
            diff = modes[s, k] - anchors[s, k]
            drift2 = drift2 + diff * diff
        if drift2 > bw2:
            for k in range(d):
                anchors[s, k] = modes[s, k]
            m = _gather(pts, anchors[s], 4.0 * bw2, cand)
        for k in range(d):
            sums[s, k] = 0.0
        count = 0
        for j in range(m):
            i = cand[j]
            dist2 = 0.0
            for k in range(d):
                diff = pts[i, k] - modes[s, k]
                dist2 = dist2 + diff * diff
            if dist2 <= bw2:
                count = count + 1
                for k in range(d):
                    sums[s, k] = sums[s, k] + pts[i, k]
        if count == 0:
            break
        disp2 = 0.0
        for k in range(d):
            mean = sums[s, k] / count
            diff = mean - modes[s, k]
            disp2 = disp2 + diff * diff
            modes[s, k] = mean
        if disp2 < tol2:
            break
        # entered the basin of an already known mode: adopt it
        for q in range(known.shape[0]):
            dist2 = 0.0
            for k in range(d):
                diff = known[q, k] - modes[s, k]
                dist2 = dist2 + diff * diff
            if dist2 <= stop2:
                for k in range(d):
                    modes[s, k] = known[q, k]
                free(cand)
                return
    free(cand)


def shift_seeds(const double[:, ::1] points, const double[:, ::1] starts, double bandwidth,
                double tol, int max_iters, const double[:, ::1] known, double stop_radius,
                int num_threads=1):
    """Run flat-kernel mean-shift from each row of ``starts``; returns the end positions.

    A trajectory that comes within ``stop_radius`` of a row of ``known`` after
    an update ends exactly on that row.
    """
    cdef Py_ssize_t m = starts.shape[0]
    cdef Py_ssize_t s
    out = np.array(starts, dtype=np.float64, copy=True, order="C")
    scratch = np.zeros_like(out)
    anchor_buf = np.zeros_like(out)
    cdef double[:, ::1] modes = out
    cdef double[:, ::1] sums = scratch
    cdef double[:, ::1] anchors = anchor_buf
    cdef double tol2 = tol * tol
    cdef double stop2 = stop_radius * stop_radius
    if m == 0:
        return out
    with nogil:
        for s in prange(m, num_threads=num_threads, schedule="dynamic"):
            _shift_one(points, modes, sums, anchors, known, stop2, s, bandwidth, tol2, max_iters)
    return out


def nearest_mode(const double[:, ::1] points, const double[:, ::1] modes, int num_threads=1):
    """Index of, and squared distance to, the nearest mode for every point (first index wins ties)."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = modes.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    idx_arr = np.full(n, -1, dtype=np.int64)
    d2_arr = np.full(n, np.inf, dtype=np.float64)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] best = d2_arr
    cdef Py_ssize_t i, j, k
    cdef double dist2, diff
    if m == 0 or n == 0:
        return idx_arr, d2_arr
    with nogil:
        for i in prange(n, num_threads=num_threads, schedule="static"):
            for j in range(m):
                dist2 = 0.0
                for k in range(d):
                    diff = points[i, k] - modes[j, k]
                    dist2 = dist2 + diff * diff
                if dist2 < best[i]:
                    best[i] = dist2
                    idx[i] = j
    return idx_arr, d2_arr


def paint_rods(int[:, ::1] labels, const double[:, ::1] geom, const int[::1] ids):
    """Paint rods in row order; later rows overwrite earlier ones.

    ``geom`` rows are ``(cx, cy, cos, sin, half_length, half_width)``.  A pixel
    belongs to a rod iff its center lies in the half-open rotated rectangle
    ``-hl <= u < hl, -hw <= v < hw``.
    """
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t r, row, col, r0, r1, c0, c1
    cdef double cx, cy, c, s, hl, hw, rad, dx, dy, u, v
    with nogil:
        for r in range(geom.shape[0]):
            cx = geom[r, 0]
            cy = geom[r, 1]
            c = geom[r, 2]
            s = geom[r, 3]
            hl = geom[r, 4]
            hw = geom[r, 5]
            rad = sqrt(hl * hl + hw * hw) + 1.0
            r0 = <Py_ssize_t>max(floor(cy - rad), 0.0)
            r1 = <Py_ssize_t>min(ceil(cy + rad), <double>(h - 1))
            c0 = <Py_ssize_t>max(floor(cx - rad), 0.0)
            c1 = <Py_ssize_t>min(ceil(cx + rad), <double>(w - 1))
            for row in range(r0, r1 + 1):
                dy = (<double>row + 0.5) - cy
                for col in range(c0, c1 + 1):
                    dx = (<double>col + 0.5) - cx
                    u = dx * c + dy * s
                    v = dy * c - dx * s
                    if -hl <= u and u < hl and -hw <= v and v < hw:
                        labels[row, col] = ids[r]
