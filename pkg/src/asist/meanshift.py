"""Seeded flat-kernel mean-shift on pixel embeddings and frame-to-frame association.

Only a random subset of points is shifted.  Seeds are processed in fixed-size
rounds; a queued seed that already lies within one bandwidth of a converged
mode is skipped, a trajectory that wanders within half the merge radius of a
mode found in an earlier round stops there, and once the queue is exhausted
any point still outside every converged basin is seeded as well, so small
objects are never lost to the sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, streams
from .core import LABEL_DTYPE, LabelVideo, TrackRecord
from .errors import InvalidInputError, ParameterError
from .oracle import EmbeddingVideo

# seeds shifted per round; fixed so results do not depend on thread count
ROUND_SIZE = 16


@dataclass(frozen=True)
class MeanShiftParams:
    bandwidth: float = 0.4
    seed_fraction: float = 0.05
    max_iters: int = 100
    convergence_tol: float = 1e-4
    merge_tol: float = 0.4
    fg_norm_threshold: float = 0.5
    min_cluster_pixels: int = 1
    assoc_threshold: float = 0.4
    seed: int = 0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ParameterError("bandwidth must be > 0")
        if not 0 < self.seed_fraction <= 1:
            raise ParameterError("seed_fraction must lie in (0, 1]")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be positive")
        if not 0 < self.convergence_tol < self.bandwidth:
            raise ParameterError("need 0 < convergence_tol < bandwidth")
        if not 0 < self.merge_tol <= self.bandwidth:
            raise ParameterError("need 0 < merge_tol <= bandwidth")
        if self.fg_norm_threshold < 0:
            raise ParameterError("fg_norm_threshold must be >= 0")
        if self.min_cluster_pixels < 1:
            raise ParameterError("min_cluster_pixels must be positive")
        if not self.assoc_threshold > 0:
            raise ParameterError("assoc_threshold must be > 0")


@dataclass(frozen=True, eq=False)
class FrameClusters:
    modes: np.ndarray       # (K, D), lexicographically sorted
    assignment: np.ndarray  # (H, W) cluster index, -1 for background

    @property
    def n_clusters(self) -> int:
        return self.modes.shape[0]


def _merge_modes(ends: np.ndarray, merge_tol: float) -> np.ndarray:
    """Greedy merge of converged positions in lexicographic order."""
    candidates = np.unique(ends, axis=0)  # sorted lexicographically
    kept = [candidates[0]]
    kept_arr = candidates[:1]
    for row in candidates[1:]:
        if np.min(np.sqrt(((kept_arr - row) ** 2).sum(axis=1))) >= merge_tol:
            kept.append(row)
            kept_arr = np.asarray(kept)
    return kept_arr


def mean_shift(points, params: MeanShiftParams, rng: np.random.Generator,
               skip_covered: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Cluster ``points`` (n, D).

    Returns ``(modes, labels)`` where ``labels[i]`` indexes the nearest mode, or
    is -1 when point ``i`` lies farther than ``bandwidth`` from every mode.
    ``skip_covered=False`` shifts every queued seed (with ``seed_fraction=1``
    this is plain all-points mean-shift).
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidInputError("mean_shift needs a non-empty (n, D) point array")
    n = pts.shape[0]
    bw2 = params.bandwidth ** 2
    n_seeds = min(n, max(1, math.ceil(params.seed_fraction * n)))
    order = rng.permutation(n)
    seeded = np.zeros(n, dtype=bool)
    covered = np.zeros(n, dtype=bool)
    converged = []

    known = np.empty((0, pts.shape[1]))

    def run(batch):
        nonlocal known
        seeded[batch] = True
        if skip_covered:
            ends = kernels.shift_seeds(pts, pts[batch], params.bandwidth, params.convergence_tol,
                                       params.max_iters, known, params.merge_tol / 2)
            known = np.unique(np.concatenate([known, ends]), axis=0)
            _, d2 = kernels.nearest_mode(pts, ends)
            covered[d2 <= bw2] = True
        else:
            ends = kernels.shift_seeds(pts, pts[batch], params.bandwidth, params.convergence_tol,
                                       params.max_iters)
        converged.append(ends)

    queue = order[:n_seeds]
    while queue.size:
        if skip_covered:
            batch = []
            for i in queue:
                if seeded[i] or covered[i]:
                    continue
                batch.append(i)
                if len(batch) == ROUND_SIZE:
                    run(np.array(batch))
                    batch = []
            if batch:
                run(np.array(batch))
        else:
            for lo in range(0, queue.size, ROUND_SIZE):
                run(queue[lo:lo + ROUND_SIZE])
            _, d2 = kernels.nearest_mode(pts, np.concatenate(converged))
            covered |= d2 <= bw2
        queue = order[~(covered | seeded)[order]]

    modes = _merge_modes(np.concatenate(converged), params.merge_tol)
    labels, d2 = kernels.nearest_mode(pts, modes)
    labels[d2 > bw2] = -1
    return modes, labels


def cluster_frame(frame, params: MeanShiftParams, rng: np.random.Generator) -> FrameClusters:
    """Cluster the foreground pixels of one ``(H, W, D)`` embedding map."""
    frame = np.asarray(frame)
    h, w, d = frame.shape
    flat = frame.reshape(-1, d).astype(np.float64)
    fg = np.flatnonzero(np.sqrt((flat ** 2).sum(axis=1)) >= params.fg_norm_threshold)
    assignment = np.full(h * w, -1, dtype=np.int32)
    if fg.size == 0:
        return FrameClusters(np.empty((0, d)), assignment.reshape(h, w))
    modes, labels = mean_shift(flat[fg], params, rng)
    counts = np.bincount(labels[labels >= 0], minlength=modes.shape[0])
    keep = counts >= params.min_cluster_pixels
    remap = np.full(modes.shape[0] + 1, -1, dtype=np.int32)
    remap[:-1][keep] = np.arange(int(keep.sum()), dtype=np.int32)
    assignment[fg] = remap[labels]  # labels == -1 picks the trailing -1
    return FrameClusters(modes[keep], assignment.reshape(h, w))


def associate_tracks(per_frame: list[FrameClusters], params: MeanShiftParams) -> LabelVideo:
    """Link clusters of consecutive frames into tracks by greedy nearest-mode matching."""
    if not per_frame:
        raise InvalidInputError("associate_tracks needs at least one frame")
    shape = per_frame[0].assignment.shape
    if any(fc.assignment.shape != shape for fc in per_frame):
        raise InvalidInputError("all frames must share the same dimensions")
    frames = np.zeros((len(per_frame), *shape), dtype=LABEL_DTYPE)
    spans: dict[int, list[int]] = {}
    live: dict[int, np.ndarray] = {}  # track id -> its mode in the previous frame
    next_id = 1
    for t, fc in enumerate(per_frame):
        owner = np.zeros(fc.n_clusters, dtype=LABEL_DTYPE)
        pairs = []
        for tid, prev in live.items():
            if fc.n_clusters == 0:
                break
            dist = np.sqrt(((fc.modes - prev) ** 2).sum(axis=1))
            for k in np.flatnonzero(dist < params.assoc_threshold):
                pairs.append((float(dist[k]), tid, int(k)))
        pairs.sort()
        taken_tracks = set()
        for _, tid, k in pairs:
            if tid in taken_tracks or owner[k]:
                continue
            owner[k] = tid
            taken_tracks.add(tid)
        new_live = {}
        for k in range(fc.n_clusters):
            if not owner[k]:
                owner[k] = next_id
                spans[next_id] = [t, t]
                next_id += 1
            tid = int(owner[k])
            spans[tid][1] = t
            new_live[tid] = fc.modes[k]
        live = new_live
        lut = np.concatenate([owner, np.zeros(1, dtype=LABEL_DTYPE)])
        frames[t] = lut[fc.assignment]  # -1 maps to the trailing 0
    tracks = tuple(TrackRecord(tid, s, e, 0) for tid, (s, e) in spans.items())
    return LabelVideo(frames, tracks)


def segment_and_track(video: EmbeddingVideo, params: MeanShiftParams = MeanShiftParams()) -> LabelVideo:
    per_frame = [
        cluster_frame(frame, params, streams.stream(params.seed, streams.MEANSHIFT, t))
        for t, frame in enumerate(video.data)
    ]
    return associate_tracks(per_frame, params)
