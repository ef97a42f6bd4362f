"""Command-line interface: ``asist simulate | split | embed | track | evaluate | colorize``.

Exit codes: 0 success, 2 argument/config error, 3 format error, 4
incompatible inputs.  Errors are reported on stderr as a single line
``asist: <CODE>: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from PIL import Image

from . import __version__, io
from .annosim import PRESETS, PresetVideo, SimParams, center_crop, simulate_preset, simulate_video, split_video
from .core import empty_video
from .errors import AsistError, FormatError, ParameterError
from .meanshift import MeanShiftParams, segment_and_track
from .metrics import AogmWeights, evaluate
from .oracle import OracleParams, embed_labels

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_MAX_BYTES = 8 << 30

# short flag names for the most used dataclass fields
ALIASES = {
    "n_objects": "--objects",
    "n_frames": "--frames",
    "canvas_size": "--canvas",
    "out_size": "--crop",
    "noise_sigma": "--sigma",
}


class CliArgumentError(ParameterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliArgumentError(message)


def _add_dataclass_flags(parser, cls, skip=()):
    group = parser.add_argument_group(cls.__name__)
    for f in dataclasses.fields(cls):
        if f.name in skip:
            continue
        flags = ["--" + f.name.replace("_", "-")]
        if f.name in ALIASES:
            flags.insert(0, ALIASES[f.name])
        kind = {"int": int, "float": float}.get(f.type if isinstance(f.type, str) else f.type.__name__, float)
        group.add_argument(*flags, dest=f.name, type=kind, default=None,
                           help=f"default {f.default}")


def _build(cls, args, config_section: dict, **extra):
    values = {}
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(config_section) - names
    if unknown:
        raise CliArgumentError(f"unknown {cls.__name__} config keys: {sorted(unknown)}")
    values.update(config_section)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    values.update({k: v for k, v in extra.items() if v is not None})
    return cls(**values)


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise CliArgumentError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CliArgumentError(f"config {path}: {exc}") from None


def _common(parser):
    parser.add_argument("--config", help="TOML config file; command-line flags take precedence")


def cmd_simulate(args, cfg) -> int:
    preset = args.preset or cfg.get("preset")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    sim_cfg = dict(cfg.get("sim", {}))
    if preset:
        if preset not in PRESETS:
            raise CliArgumentError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        overrides = {k: v for k, v in sim_cfg.items() if k not in ("n_objects", "seed")}
        for f in dataclasses.fields(SimParams):
            v = getattr(args, f.name, None)
            if v is not None and f.name not in ("n_objects", "seed"):
                overrides[f.name] = v
        n_frames = overrides.pop("n_frames", None)
        if args.n_objects is not None:
            raise CliArgumentError("--objects cannot be combined with --preset")
        videos = simulate_preset(preset, seed=seed, n_frames=n_frames, **overrides)
    else:
        params = _build(SimParams, args, sim_cfg, seed=seed)
        videos = [PresetVideo("", params, center_crop(simulate_video(params), params.out_size))]
    with io.atomic_dir(args.out, args.overwrite) as tmp:
        for item in videos:
            target = tmp / item.name if item.name else tmp
            target.mkdir(exist_ok=True)
            io.write_label_video(item.video, target)
    objects = ",".join(str(p.n_objects) for p in dict.fromkeys(v.params for v in videos))
    print(f"simulated {len(videos)} video(s): objects={objects} frames={videos[0].params.n_frames} "
          f"seed={seed} size={videos[0].video.width}x{videos[0].video.height} -> {args.out}")
    return 0


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        rows, cols = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise CliArgumentError(f"grid must look like 2x2, got {text!r}") from None
    return rows, cols


def cmd_split(args, cfg) -> int:
    video = io.read_label_video(args.input)
    parts = split_video(video, _parse_grid(args.grid))
    prefix = args.out_prefix or str(Path(args.input).resolve())
    outputs = [Path(f"{prefix}_q{i}") for i in range(len(parts))]
    for out in outputs:
        if out.exists() and not args.overwrite:
            raise CliArgumentError(f"output {out} already exists (use --overwrite)")
    for out, part in zip(outputs, parts):
        with io.atomic_dir(out, args.overwrite) as tmp:
            io.write_label_video(part, tmp)
    print(f"split {args.input} into {len(parts)} videos of {parts[0].width}x{parts[0].height}")
    return 0


def cmd_embed(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    params = _build(OracleParams, args, dict(cfg.get("oracle", {})), seed=seed)
    video = io.read_label_video(args.input)
    size = io.embedding_nbytes((*video.shape, params.dim))
    if size > args.max_bytes:
        raise CliArgumentError(f"embedding would take {size} bytes, above --max-bytes {args.max_bytes}")
    emb = embed_labels(video, params)
    with io.atomic_file(args.out) as tmp:
        io.write_embedding(emb, tmp)
    print(f"embedded {video.n_frames} frames of {video.width}x{video.height} at D={params.dim} "
          f"sigma={params.noise_sigma} -> {args.out}")
    return 0


def cmd_track(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    params = _build(MeanShiftParams, args, dict(cfg.get("meanshift", {})), seed=seed)
    emb = io.read_embedding(args.input)
    result = segment_and_track(emb, params)
    with io.atomic_dir(args.out, args.overwrite) as tmp:
        io.write_label_video(result, tmp)
    print(f"tracked {result.n_frames} frames: {len(result.tracks)} tracks -> {args.out}")
    return 0


def cmd_evaluate(args, cfg) -> int:
    weights_cfg = dict(cfg.get("weights", {}))
    if args.weights_from:
        weights_cfg.update(io.read_report(args.weights_from).get("weights", {}))
    weights = _build(AogmWeights, args, weights_cfg)
    ref = io.read_label_video(args.ref)
    res_dir = Path(args.res)
    if res_dir.is_dir() and not io.mask_files(res_dir):
        comp = empty_video(ref.shape)
    else:
        comp = io.read_label_video(res_dir)
    report = evaluate(ref, comp, weights)
    payload = report.to_dict()
    payload["version"] = __version__
    with io.atomic_file(args.out) as tmp:
        io.write_report(payload, tmp)
    print(f"DET={report.det:.6f} SEG={report.seg:.6f} TRA={report.tra:.6f} -> {args.out}")
    return 0


def cmd_colorize(args, cfg) -> int:
    files = io.mask_files(args.input)
    if not files:
        raise FormatError(f"{args.input}: no mask files found")
    with io.atomic_dir(args.out, args.overwrite) as tmp:
        for t, path in enumerate(files):
            frame = io._read_mask(path)
            Image.fromarray(io.colorize_frame(frame)).save(tmp / f"color_t{t:04d}.png")
    print(f"colorized {len(files)} frames -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"asist {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a label video (or a preset set of videos)")
    _common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    _add_dataclass_flags(p, SimParams, skip=("seed",))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("split", help="tile a label video into a grid of smaller videos")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--grid", default="2x2")
    p.add_argument("--out-prefix", help="output directories are <prefix>_q0, <prefix>_q1, ...")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("embed", help="oracle pixel embeddings for a label video")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-bytes", type=int, default=DEFAULT_MAX_BYTES)
    _add_dataclass_flags(p, OracleParams, skip=("seed",))
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("track", help="mean-shift segmentation and tracking of an embedding file")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--overwrite", action="store_true")
    _add_dataclass_flags(p, MeanShiftParams, skip=("seed",))
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("evaluate", help="DET/SEG/TRA of a result against a reference")
    _common(p)
    p.add_argument("--ref", required=True)
    p.add_argument("--res", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--weights-from", help="reuse the weights echoed in an earlier report")
    _add_dataclass_flags(p, AogmWeights)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("colorize", help="render label frames as RGB images")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_colorize)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except AsistError as exc:
        print(f"asist: {exc.code}: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"asist: E_IO: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except (TypeError, ValueError) as exc:
        # bad config value types end up here
        print(f"asist: E_ARG: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
