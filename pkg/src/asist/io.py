"""On-disk formats.

Label videos are directories of 16-bit PNG masks ``mask_t0000.png, ...`` plus
a ``tracks.txt`` track table (``id first_frame last_frame parent`` per line).
Cell Tracking Challenge TIFF masks (``mask000.tif`` / ``man_seg000.tif``) and
``man_track.txt`` / ``res_track.txt`` tables are accepted on read.

Embedding videos are single binary files: the magic ``ASEMB\\x01``, then
little-endian uint32 T, H, W, D, then T*H*W*D little-endian float32 values in
(t, row, col, dim) order.
"""

from __future__ import annotations

import colorsys
import contextlib
import json
import os
import re
import shutil
import struct
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .core import LabelVideo, TrackRecord
from .errors import FormatError, InvalidInputError, MalformedTrackTableError
from .oracle import EmbeddingVideo

MASK_TEMPLATE = "mask_t{:04d}.png"
TRACKS_FILE = "tracks.txt"
EMBED_MAGIC = b"ASEMB\x01"
_HEADER = struct.Struct("<4I")
_MASK_RE = re.compile(r"^(?:mask_t|mask|man_seg)(\d+)\.(png|tif|tiff)$", re.IGNORECASE)
_TRACK_FILES = (TRACKS_FILE, "man_track.txt", "res_track.txt")


@contextlib.contextmanager
def atomic_dir(path, overwrite: bool = False):
    """Yield a temporary sibling directory that is renamed to ``path`` on success."""
    path = Path(path)
    if path.exists() and not overwrite and (not path.is_dir() or any(path.iterdir())):
        raise InvalidInputError(f"output {path} already exists and is not empty (use --overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{path.name}.tmp-", dir=path.parent))
    umask = os.umask(0)
    os.umask(umask)
    tmp.chmod(0o777 & ~umask)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if path.exists():
        shutil.rmtree(path) if path.is_dir() else path.unlink()
    os.rename(tmp, path)


@contextlib.contextmanager
def atomic_file(path, overwrite: bool = True):
    path = Path(path)
    if path.exists() and not overwrite:
        raise InvalidInputError(f"output {path} already exists")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.tmp-", dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    os.replace(tmp, path)


def write_tracks(tracks, path) -> None:
    lines = [f"{r.id} {r.first_frame} {r.last_frame} {r.parent}\n" for r in sorted(tracks, key=lambda r: r.id)]
    Path(path).write_text("".join(lines))


def read_tracks(path) -> tuple[TrackRecord, ...]:
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise MalformedTrackTableError(f"{path}:{n}: expected 4 fields, got {len(parts)}")
        try:
            out.append(TrackRecord(*(int(p) for p in parts)))
        except ValueError as exc:
            raise MalformedTrackTableError(f"{path}:{n}: {exc}") from None
    return tuple(out)


def write_label_video(video: LabelVideo, directory) -> None:
    """Write masks and track table into an existing directory."""
    directory = Path(directory)
    if video.frames.size and video.frames.max() > np.iinfo(np.uint16).max:
        raise InvalidInputError("track ids above 65535 do not fit a 16-bit mask")
    for t, frame in enumerate(video.frames):
        Image.fromarray(frame.astype(np.uint16)).save(directory / MASK_TEMPLATE.format(t), format="PNG")
    write_tracks(video.tracks, directory / TRACKS_FILE)


def mask_files(directory) -> list[Path]:
    found = []
    for p in Path(directory).iterdir():
        m = _MASK_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort()
    if [i for i, _ in found] != list(range(len(found))):
        raise FormatError(f"{directory}: mask files are not numbered 0..{len(found) - 1} without gaps")
    return [p for _, p in found]


def _read_mask(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.array(im)
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if arr.ndim != 2:
        raise FormatError(f"{path}: expected a single-channel mask, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        raise FormatError(f"{path}: expected integer labels, got {arr.dtype}")
    return arr.astype(np.int32)


def read_label_video(directory) -> LabelVideo:
    directory = Path(directory)
    if not directory.is_dir():
        raise FormatError(f"{directory} is not a directory")
    files = mask_files(directory)
    if not files:
        raise FormatError(f"{directory}: no mask files found")
    frames = [_read_mask(p) for p in files]
    if len({f.shape for f in frames}) != 1:
        raise FormatError(f"{directory}: mask frames differ in size")
    for name in _TRACK_FILES:
        if (directory / name).exists():
            tracks = read_tracks(directory / name)
            break
    else:
        raise FormatError(f"{directory}: no track table ({' / '.join(_TRACK_FILES)})")
    video = LabelVideo(np.stack(frames), tracks)
    video.validate()
    return video


def embedding_nbytes(shape) -> int:
    t, h, w, d = shape
    return len(EMBED_MAGIC) + _HEADER.size + 4 * t * h * w * d


def write_embedding(video: EmbeddingVideo, path) -> None:
    t, h, w, d = video.data.shape
    with open(path, "wb") as fh:
        fh.write(EMBED_MAGIC)
        fh.write(_HEADER.pack(t, h, w, d))
        fh.write(np.ascontiguousarray(video.data, dtype="<f4").tobytes())


def read_embedding(path) -> EmbeddingVideo:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(EMBED_MAGIC))
        if magic[:5] != EMBED_MAGIC[:5]:
            raise FormatError(f"{path}: not an embedding file (bad magic)")
        if magic != EMBED_MAGIC:
            raise FormatError(f"{path}: unsupported embedding format version {magic[5:]!r}")
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        shape = _HEADER.unpack(header)
        count = int(np.prod(shape, dtype=np.int64))
        data = np.fromfile(fh, dtype="<f4", count=count)
        if data.size != count or fh.read(1):
            raise FormatError(f"{path}: payload size does not match header {shape}")
    return EmbeddingVideo(data.reshape(shape))


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None


GOLDEN = 0.618033988749895


def palette(track_id: int) -> tuple[int, int, int]:
    """Deterministic colour for a track id (golden-ratio hue stepping)."""
    hue = (track_id * GOLDEN) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 1.0)
    return int(round(r * 255)), int(round(g * 255)), int(round(b * 255))


def colorize_frame(frame: np.ndarray) -> np.ndarray:
    ids = np.unique(frame)
    lut = np.zeros((int(ids.max()) + 1 if ids.size else 1, 3), dtype=np.uint8)
    for i in ids:
        if i > 0:
            lut[i] = palette(int(i))
    return lut[frame]
