"""Pure-numpy versions of the compiled kernels (same signatures and semantics)."""

import math

import numpy as np

# upper bound on elements in one broadcast distance block
_BLOCK = 1 << 22


def _chunk(n_rows: int, n_cols: int, d: int) -> int:
    return max(1, _BLOCK // max(1, n_cols * d))


def shift_seeds(points, starts, bandwidth, tol, max_iters, known, stop_radius, num_threads=1):
    points = np.ascontiguousarray(points, dtype=np.float64)
    known = np.asarray(known, dtype=np.float64).reshape(-1, points.shape[1])
    stop2 = stop_radius * stop_radius
    modes = np.array(starts, dtype=np.float64, copy=True, order="C")
    bw2 = bandwidth * bandwidth
    tol2 = tol * tol
    active = np.arange(modes.shape[0])
    step = _chunk(modes.shape[0], points.shape[0], points.shape[1])
    for _ in range(max_iters):
        if active.size == 0:
            break
        still = []
        for lo in range(0, active.size, step):
            rows = active[lo:lo + step]
            cur = modes[rows]
            d2 = ((points[None, :, :] - cur[:, None, :]) ** 2).sum(axis=2)
            inside = d2 <= bw2
            counts = inside.sum(axis=1)
            live = counts > 0
            sums = inside.astype(np.float64) @ points
            means = np.where(live[:, None], sums / np.maximum(counts, 1)[:, None], cur)
            disp2 = ((means - cur) ** 2).sum(axis=1)
            modes[rows] = means
            moving = live & (disp2 >= tol2)
            if known.shape[0] and moving.any():
                kd2 = ((means[:, None, :] - known[None, :, :]) ** 2).sum(axis=2)
                hit = moving & (kd2 <= stop2).any(axis=1)
                if hit.any():
                    first = (kd2 <= stop2).argmax(axis=1)
                    modes[rows[hit]] = known[first[hit]]
                    moving &= ~hit
            still.append(rows[moving])
        active = np.concatenate(still) if still else active[:0]
    return modes


def nearest_mode(points, modes, num_threads=1):
    points = np.ascontiguousarray(points, dtype=np.float64)
    modes = np.ascontiguousarray(modes, dtype=np.float64)
    n = points.shape[0]
    idx = np.full(n, -1, dtype=np.int64)
    best = np.full(n, np.inf)
    if modes.shape[0] == 0 or n == 0:
        return idx, best
    step = _chunk(n, modes.shape[0], points.shape[1])
    for lo in range(0, n, step):
        d2 = ((points[lo:lo + step, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
        k = d2.argmin(axis=1)
        idx[lo:lo + step] = k
        best[lo:lo + step] = d2[np.arange(k.size), k]
    return idx, best


def paint_rods(labels, geom, ids):
    h, w = labels.shape
    for (cx, cy, c, s, hl, hw), rid in zip(np.asarray(geom), np.asarray(ids)):
        rad = math.sqrt(hl * hl + hw * hw) + 1.0
        r0 = int(max(math.floor(cy - rad), 0.0))
        r1 = int(min(math.ceil(cy + rad), float(h - 1)))
        c0 = int(max(math.floor(cx - rad), 0.0))
        c1 = int(min(math.ceil(cx + rad), float(w - 1)))
        if r1 < r0 or c1 < c0:
            continue
        dy = (np.arange(r0, r1 + 1, dtype=np.float64) + 0.5 - cy)[:, None]
        dx = (np.arange(c0, c1 + 1, dtype=np.float64) + 0.5 - cx)[None, :]
        u = dx * c + dy * s
        v = dy * c - dx * s
        inside = (-hl <= u) & (u < hl) & (-hw <= v) & (v < hw)
        labels[r0:r1 + 1, c0:c1 + 1][inside] = rid
