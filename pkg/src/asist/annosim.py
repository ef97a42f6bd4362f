"""Simulated instance-annotation videos of rod-like objects.

Rods are placed uniformly on an oversized canvas, then every frame each rod
independently (1) translates by exactly one pixel in a uniformly random
direction, (2) rotates by one degree with random sign, and (3) grows or
shrinks by one pixel along its fixed length direction, each sub-step firing
with its own probability.  Objects move in and out of view through a centered
crop of the canvas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, streams
from .core import LabelVideo, tracks_from_frames
from .errors import InvalidInputError, ParameterError

GROW = "grow"
SHRINK = "shrink"


@dataclass(frozen=True)
class SimParams:
    n_objects: int = 110
    canvas_size: int = 550
    out_size: int = 512
    n_frames: int = 10
    min_length: float = 15.0
    max_length: float = 60.0
    min_width: float = 2.0
    max_width: float = 5.0
    move_prob: float = 0.5
    rotate_prob: float = 0.5
    resize_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_objects < 1:
            raise ParameterError(f"n_objects must be positive, got {self.n_objects}")
        if self.n_frames < 1:
            raise ParameterError(f"n_frames must be positive, got {self.n_frames}")
        if not self.canvas_size > self.out_size > 0:
            raise ParameterError(
                f"need canvas_size > out_size > 0, got {self.canvas_size} and {self.out_size}"
            )
        if not self.max_length >= self.min_length >= 2:
            raise ParameterError("need max_length >= min_length >= 2")
        if not self.max_width >= self.min_width >= 1:
            raise ParameterError("need max_width >= min_width >= 1")
        for name in ("move_prob", "rotate_prob", "resize_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class Rod:
    id: int
    cx: float
    cy: float
    orientation: float  # degrees in [0, 360), long axis measured from +x toward +y (rows)
    length: float
    width: float
    length_direction: str = GROW

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)


def rod_streams(params: SimParams) -> list[np.random.Generator]:
    """One independent stream per rod, keyed by (seed, rod id)."""
    return [streams.stream(params.seed, streams.ROD, i) for i in range(1, params.n_objects + 1)]


def init_first_frame(params: SimParams, rngs: list[np.random.Generator] | None = None) -> list[Rod]:
    if rngs is None:
        rngs = rod_streams(params)
    rods = []
    for i, rng in enumerate(rngs, start=1):
        u = rng.random(6)
        rods.append(Rod(
            id=i,
            cx=u[0] * params.canvas_size,
            cy=u[1] * params.canvas_size,
            orientation=u[2] * 360.0,
            length=params.min_length + u[3] * (params.max_length - params.min_length),
            width=params.min_width + u[4] * (params.max_width - params.min_width),
            length_direction=GROW if u[5] < 0.5 else SHRINK,
        ))
    return rods


def step_rod(rod: Rod, rng, params: SimParams = SimParams()) -> Rod:
    """Advance one rod by one frame.

    Draws exactly five uniforms per call regardless of which branches fire,
    so a rod's stream stays aligned across frames.
    """
    u = rng.random(5)
    cx, cy, angle, length = rod.cx, rod.cy, rod.orientation, rod.length
    if u[0] < params.move_prob:
        theta = 2.0 * math.pi * u[1]
        cx += math.cos(theta)
        cy += math.sin(theta)
    if u[2] < params.rotate_prob:
        angle = (angle + (1.0 if u[3] < 0.5 else -1.0)) % 360.0
    if u[4] < params.resize_prob:
        delta = 1.0 if rod.length_direction == GROW else -1.0
        length = max(params.min_length, length + delta)
    return replace(rod, cx=cx, cy=cy, orientation=angle, length=length)


def rasterize(rods: list[Rod], canvas_size: int | tuple[int, int]) -> np.ndarray:
    """Paint rods into a label frame; higher ids are painted over lower ids."""
    h, w = (canvas_size, canvas_size) if np.isscalar(canvas_size) else canvas_size
    labels = np.zeros((h, w), dtype=np.int32)
    if not rods:
        return labels
    ordered = sorted(rods, key=lambda r: r.id)
    geom = np.array([
        (r.cx, r.cy, math.cos(math.radians(r.orientation)), math.sin(math.radians(r.orientation)),
         r.length / 2.0, r.width / 2.0)
        for r in ordered
    ], dtype=np.float64)
    ids = np.array([r.id for r in ordered], dtype=np.int32)
    kernels.paint_rods(labels, geom, ids)
    return labels


def simulate_rods(params: SimParams) -> list[list[Rod]]:
    """Rod states for every frame (index = frame)."""
    rngs = rod_streams(params)
    rods = init_first_frame(params, rngs)
    history = [rods]
    for _ in range(1, params.n_frames):
        rods = [step_rod(r, g, params) for r, g in zip(rods, rngs)]
        history.append(rods)
    return history


def simulate_video(params: SimParams) -> LabelVideo:
    """Label video on the oversized canvas.

    Track ids equal rod ids; a rod that is completely hidden behind
    higher-id rods for some frames and then reappears continues under a
    fresh id so every track stays temporally contiguous.
    """
    frames = np.stack([rasterize(rods, params.canvas_size) for rods in simulate_rods(params)])
    return tracks_from_frames(frames, keep_ids=True)


def _retrack_window(video: LabelVideo, rows: slice, cols: slice) -> LabelVideo:
    return tracks_from_frames(video.frames[:, rows, cols])


def center_crop(video: LabelVideo, out_size: int) -> LabelVideo:
    h, w = video.height, video.width
    if out_size > min(h, w) or out_size < 1:
        raise InvalidInputError(f"cannot crop a {h}x{w} video to {out_size}x{out_size}")
    top = (h - out_size) // 2
    left = (w - out_size) // 2
    return _retrack_window(video, slice(top, top + out_size), slice(left, left + out_size))


def split_video(video: LabelVideo, grid: tuple[int, int] = (2, 2)) -> list[LabelVideo]:
    """Tile the video into ``rows x cols`` sub-videos in row-major order."""
    rows, cols = grid
    h, w = video.height, video.width
    if rows < 1 or cols < 1 or h % rows or w % cols:
        raise InvalidInputError(f"a {h}x{w} video cannot be split into a {rows}x{cols} grid")
    th, tw = h // rows, w // cols
    return [
        _retrack_window(video, slice(r * th, (r + 1) * th), slice(c * tw, (c + 1) * tw))
        for r in range(rows)
        for c in range(cols)
    ]


@dataclass(frozen=True)
class Preset:
    name: str
    object_counts: tuple[int, ...]
    n_frames: int
    canvas_size: int = 550
    out_size: int = 512
    grid: tuple[int, int] = (1, 1)


PRESETS = {
    "simu-1": Preset("simu-1", (110,), 10),
    "simu-5": Preset("simu-5", (80, 110, 160, 200, 220), 50),
    "simu-20": Preset("simu-20", (80, 110, 160, 200, 220), 50, grid=(2, 2)),
}


@dataclass(frozen=True)
class PresetVideo:
    name: str
    params: SimParams
    video: LabelVideo = field(repr=False)


def preset_params(preset: str, seed: int = 0, n_frames: int | None = None, **overrides) -> list[SimParams]:
    """Simulation parameters for every parent video of a preset.

    Video ``k`` of a multi-video preset is simulated with seed ``seed + k``.
    """
    try:
        preset_def = PRESETS[preset]
    except KeyError:
        raise ParameterError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    frames = preset_def.n_frames if n_frames is None else n_frames
    return [
        SimParams(**{
            "n_objects": n,
            "canvas_size": preset_def.canvas_size,
            "out_size": preset_def.out_size,
            "n_frames": frames,
            "seed": seed + k,
            **overrides,
        })
        for k, n in enumerate(preset_def.object_counts)
    ]


def simulate_preset(preset: str, seed: int = 0, n_frames: int | None = None, **overrides) -> list[PresetVideo]:
    preset_def = PRESETS.get(preset)
    out = []
    params_list = preset_params(preset, seed, n_frames, **overrides)
    for k, params in enumerate(params_list):
        cropped = center_crop(simulate_video(params), params.out_size)
        name = "" if len(params_list) == 1 else f"v{k}"
        if preset_def.grid == (1, 1):
            out.append(PresetVideo(name, params, cropped))
            continue
        for q, part in enumerate(split_video(cropped, preset_def.grid)):
            out.append(PresetVideo(f"{name}_q{q}" if name else f"q{q}", params, part))
    return out


def labeled_pixel_count(video: LabelVideo) -> np.ndarray:
    return (video.frames > 0).reshape(video.n_frames, -1).sum(axis=1)

