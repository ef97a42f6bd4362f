"""Surrogate pixel embeddings computed from ground-truth labels.

Each track gets one unit-norm anchor vector, constant across frames; every
pixel of the track carries that anchor plus i.i.d. Gaussian noise, and
background pixels carry pure noise around the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import streams
from .core import LabelVideo
from .errors import InvalidInputError, ParameterError

EMBED_DTYPE = np.float32

# anchors closer than this are redrawn.  1.5x the default tracker bandwidth:
# at 0.8 (2x) random placement on the 8-D unit sphere saturates near 190
# anchors, below the track count of the largest preset videos.
DEFAULT_MIN_SEPARATION = 0.6
MAX_ANCHOR_RETRIES = 10_000


@dataclass(frozen=True)
class OracleParams:
    dim: int = 8
    noise_sigma: float = 0.0
    seed: int = 0
    min_separation: float = DEFAULT_MIN_SEPARATION

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"embedding dim must be >= 2, got {self.dim}")
        if not self.noise_sigma >= 0:
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.min_separation < 0:
            raise ParameterError("min_separation must be >= 0")


@dataclass(frozen=True, eq=False)
class EmbeddingVideo:
    """``(T, H, W, D)`` float32 embedding maps."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 4:
            raise InvalidInputError(f"embedding video must be (T, H, W, D), got shape {data.shape}")
        data = np.ascontiguousarray(data, dtype=EMBED_DTYPE)
        if not np.isfinite(data).all():
            raise InvalidInputError("embedding values must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[3]

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> np.ndarray:
        return self.data


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def anchor_vectors(track_ids, params: OracleParams) -> dict[int, np.ndarray]:
    """Anchor per track id, drawn from the (seed, id) stream.

    Ids are processed in increasing order; a candidate within
    ``min_separation`` of an earlier anchor is redrawn from the same stream.
    """
    anchors: dict[int, np.ndarray] = {}
    kept = np.empty((0, params.dim))
    for tid in sorted(int(i) for i in track_ids):
        rng = streams.stream(params.seed, streams.ANCHOR, tid)
        for _ in range(MAX_ANCHOR_RETRIES):
            v = _unit(rng, params.dim)
            if kept.shape[0] == 0 or np.min(np.linalg.norm(kept - v, axis=1)) >= params.min_separation:
                break
        else:
            raise ParameterError(
                f"could not place an anchor for track {tid} at separation {params.min_separation} "
                f"in {params.dim} dimensions; raise dim or lower min_separation"
            )
        anchors[tid] = v
        kept = np.vstack([kept, v])
    return anchors


def embed_labels(video: LabelVideo, params: OracleParams = OracleParams()) -> EmbeddingVideo:
    ids = sorted({r.id for r in video.tracks} | set(np.unique(video.frames).tolist()) - {0})
    anchors = anchor_vectors(ids, params)
    lut = np.zeros((max(ids, default=0) + 1, params.dim))
    for tid, v in anchors.items():
        lut[tid] = v
    t, h, w = video.shape
    out = np.empty((t, h, w, params.dim), dtype=EMBED_DTYPE)
    for k in range(t):
        frame = lut[video.frames[k]]
        if params.noise_sigma > 0:
            rng = streams.stream(params.seed, streams.NOISE, k)
            frame = frame + params.noise_sigma * rng.standard_normal((h, w, params.dim))
        out[k] = frame
    return EmbeddingVideo(out)
