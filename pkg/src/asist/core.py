"""Label videos, track tables and tracking graphs.

A label frame is a 2-D integer array (0 = background, any other value is a
track id).  A :class:`LabelVideo` stacks frames into a ``(T, H, W)`` array and
carries a Cell-Tracking-Challenge style track table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import InvalidInputError, MalformedTrackTableError

LABEL_DTYPE = np.int32

Node = tuple[int, int]
Edge = tuple[Node, Node]

CONTINUATION = "continuation"
PARENT = "parent"


@dataclass(frozen=True)
class TrackRecord:
    id: int
    first_frame: int
    last_frame: int
    parent: int = 0

    def __post_init__(self):
        if self.id <= 0:
            raise MalformedTrackTableError(f"track id must be positive, got {self.id}")
        if self.first_frame > self.last_frame:
            raise MalformedTrackTableError(
                f"track {self.id}: first_frame {self.first_frame} > last_frame {self.last_frame}"
            )


@dataclass(frozen=True, eq=False)
class LabelVideo:
    """Immutable ``(T, H, W)`` stack of label frames plus its track table."""

    frames: np.ndarray
    tracks: tuple[TrackRecord, ...] = ()

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3:
            raise InvalidInputError(f"label video must be (T, H, W), got shape {frames.shape}")
        if frames.size and frames.min() < 0:
            raise InvalidInputError("label ids must be non-negative")
        frames = np.array(frames, dtype=LABEL_DTYPE, copy=True, order="C")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        tracks = tuple(sorted(self.tracks, key=lambda r: r.id))
        object.__setattr__(self, "tracks", tracks)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.frames.shape)

    def track(self, track_id: int) -> TrackRecord:
        for rec in self.tracks:
            if rec.id == track_id:
                return rec
        raise KeyError(track_id)

    def validate(self) -> None:
        """Check the track table against the frames.

        Raises :class:`MalformedTrackTableError` for ids missing from the
        table, duplicate ids, gaps inside a track's frame range, or invalid
        parent links.
        """
        table = {}
        for rec in self.tracks:
            if rec.id in table:
                raise MalformedTrackTableError(f"duplicate track id {rec.id}")
            if rec.last_frame >= self.n_frames:
                raise MalformedTrackTableError(
                    f"track {rec.id} ends at frame {rec.last_frame} but the video has {self.n_frames} frames"
                )
            table[rec.id] = rec
        for t, ids in enumerate(frame_ids(self.frames)):
            for i in ids:
                rec = table.get(int(i))
                if rec is None:
                    raise MalformedTrackTableError(f"id {i} in frame {t} is absent from the track table")
                if not rec.first_frame <= t <= rec.last_frame:
                    raise MalformedTrackTableError(
                        f"id {i} appears in frame {t} outside its range [{rec.first_frame}, {rec.last_frame}]"
                    )
            present = set(int(i) for i in ids)
            for rec in table.values():
                if rec.first_frame <= t <= rec.last_frame and rec.id not in present:
                    raise MalformedTrackTableError(f"track {rec.id} is missing from frame {t} (non-contiguous)")
        for rec in table.values():
            if rec.parent:
                parent = table.get(rec.parent)
                if parent is None:
                    raise MalformedTrackTableError(f"track {rec.id} has unknown parent {rec.parent}")
                if parent.last_frame != rec.first_frame - 1:
                    raise MalformedTrackTableError(
                        f"track {rec.id} starts at {rec.first_frame} but parent {rec.parent} ends at {parent.last_frame}"
                    )

    def same_as(self, other: "LabelVideo") -> bool:
        return (
            self.frames.shape == other.frames.shape
            and np.array_equal(self.frames, other.frames)
            and self.tracks == other.tracks
        )


def empty_video(shape: tuple[int, int, int]) -> LabelVideo:
    return LabelVideo(np.zeros(shape, dtype=LABEL_DTYPE), ())


def frame_ids(frames: np.ndarray) -> list[np.ndarray]:
    """Sorted nonzero ids present in each frame."""
    out = []
    for frame in frames:
        ids = np.unique(frame)
        out.append(ids[ids > 0])
    return out


def frame_regions(frame: np.ndarray) -> dict[int, np.ndarray]:
    """Map each nonzero id in ``frame`` to the sorted flat indices of its pixels."""
    flat = np.asarray(frame).ravel()
    order = np.argsort(flat, kind="stable")
    values = flat[order]
    ids, starts = np.unique(values, return_index=True)
    bounds = list(starts[1:]) + [values.size]
    return {
        int(i): order[s:e]
        for i, s, e in zip(ids, starts, bounds)
        if i > 0
    }


def jaccard(a: Iterable, b: Iterable) -> float:
    """Jaccard index of two pixel sets (Python sets or index arrays)."""
    if isinstance(a, (set, frozenset)) and isinstance(b, (set, frozenset)):
        if not a and not b:
            raise InvalidInputError("jaccard of two empty sets is undefined")
        return len(a & b) / len(a | b)
    a = np.unique(np.asarray(list(a) if not isinstance(a, np.ndarray) else a).ravel())
    b = np.unique(np.asarray(list(b) if not isinstance(b, np.ndarray) else b).ravel())
    if a.size == 0 and b.size == 0:
        raise InvalidInputError("jaccard of two empty sets is undefined")
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / (a.size + b.size - inter)


def tracks_from_frames(frames: np.ndarray, keep_ids: bool = False) -> LabelVideo:
    """Build a contiguous track table from raw label frames.

    Each maximal run of consecutive frames in which an id is visible becomes
    one track with parent 0.  With ``keep_ids`` the first run of an id keeps
    that id and later runs get fresh ids above the current maximum; otherwise
    the result is canonically relabelled.
    """
    frames = np.asarray(frames)
    out = np.zeros(frames.shape, dtype=LABEL_DTYPE)
    next_id = int(frames.max()) + 1 if frames.size else 1
    current: dict[int, int] = {}  # original id -> output id of the run alive at t-1
    used: set[int] = set()
    spans: dict[int, list[int]] = {}
    for t, frame in enumerate(frames):
        ids, inverse = np.unique(frame, return_inverse=True)
        mapped = np.zeros(ids.shape, dtype=LABEL_DTYPE)
        alive = {}
        for k, i in enumerate(ids):
            i = int(i)
            if i == 0:
                continue
            new = current.get(i)
            if new is None:
                if keep_ids and i not in used:
                    new = i
                else:
                    new = next_id
                    next_id += 1
                used.add(i)
                spans[new] = [t, t]
            spans[new][1] = t
            alive[i] = new
            mapped[k] = new
        current = alive
        out[t] = mapped[inverse.reshape(frame.shape)]
    tracks = tuple(TrackRecord(i, s, e, 0) for i, (s, e) in spans.items())
    video = LabelVideo(out, tracks)
    return video if keep_ids else relabel_canonical(video)


def relabel_canonical(video: LabelVideo) -> LabelVideo:
    """Renumber tracks 1..K by (first frame, first raster position in that frame)."""
    keys = []
    by_start: dict[int, list[TrackRecord]] = {}
    for rec in video.tracks:
        by_start.setdefault(rec.first_frame, []).append(rec)
    for t, recs in by_start.items():
        flat = video.frames[t].ravel()
        ids, first_pos = np.unique(flat, return_index=True)
        pos = dict(zip(ids.tolist(), first_pos.tolist()))
        for rec in recs:
            if rec.id not in pos:
                raise MalformedTrackTableError(f"track {rec.id} has no pixels in its first frame {t}")
            keys.append((t, pos[rec.id], rec.id))
    keys.sort()
    mapping = {old: new for new, (_, _, old) in enumerate(keys, start=1)}
    max_id = int(video.frames.max()) if video.frames.size else 0
    lut = np.zeros(max(max_id, max(mapping, default=0)) + 1, dtype=LABEL_DTYPE)
    for old, new in mapping.items():
        lut[old] = new
    frames = lut[video.frames]
    tracks = tuple(
        TrackRecord(mapping[r.id], r.first_frame, r.last_frame, mapping.get(r.parent, 0))
        for r in video.tracks
    )
    return LabelVideo(frames, tracks)


@dataclass(frozen=True, eq=False)
class TrackingGraph:
    """Acyclic oriented graph of ``(frame, id)`` nodes.

    ``node_pixels`` maps every node to the sorted flat pixel indices (within
    its frame) it covers; ``edges`` maps each temporal link to its kind,
    either :data:`CONTINUATION` or :data:`PARENT`.
    """

    shape: tuple[int, int, int]
    node_pixels: dict[Node, np.ndarray] = field(default_factory=dict)
    edges: dict[Edge, str] = field(default_factory=dict)

    @property
    def nodes(self) -> frozenset[Node]:
        return frozenset(self.node_pixels)

    def frame_nodes(self, t: int) -> list[Node]:
        return sorted(n for n in self.node_pixels if n[0] == t)


def build_tracking_graph(video: LabelVideo) -> TrackingGraph:
    video.validate()
    node_pixels: dict[Node, np.ndarray] = {}
    for t, frame in enumerate(video.frames):
        for i, pix in frame_regions(frame).items():
            node_pixels[(t, i)] = pix
    edges: dict[Edge, str] = {}
    table = {r.id: r for r in video.tracks}
    for rec in video.tracks:
        for t in range(rec.first_frame, rec.last_frame):
            edges[((t, rec.id), (t + 1, rec.id))] = CONTINUATION
        if rec.parent:
            parent = table[rec.parent]
            edges[((parent.last_frame, parent.id), (rec.first_frame, rec.id))] = PARENT
    return TrackingGraph(video.shape, node_pixels, edges)
