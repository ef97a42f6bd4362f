"""Benchmark the compiled kernels against the numpy fallback, and seeded
mean-shift against all-seeds brute force on one 512x512 oracle frame.

    python benchmarks/bench_kernels.py [--objects 275] [--repeat 3] [--json out.json]
"""

import argparse
import json
import os
import time

import numpy as np

from asist import kernels
from asist.annosim import SimParams, center_crop, init_first_frame, rasterize, simulate_video
from asist.meanshift import MeanShiftParams, mean_shift
from asist.oracle import OracleParams, embed_labels


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same_partition(a, b):
    pairs = np.unique(np.stack([a, b]), axis=1)
    return np.unique(pairs[0]).size == pairs.shape[1] == np.unique(pairs[1]).size


def oracle_points(n_objects, sigma):
    ref = center_crop(simulate_video(SimParams(n_objects=n_objects, n_frames=1, seed=42)), 512)
    frame = embed_labels(ref, OracleParams(dim=8, noise_sigma=sigma, seed=42)).data[0]
    flat = frame.reshape(-1, 8).astype(np.float64)
    return flat[np.sqrt((flat ** 2).sum(axis=1)) >= 0.5]


def bench_backends(pts, repeat):
    rows = []
    try:
        compiled = kernels.backend("cython")
    except ImportError:
        return rows
    numpy_impl = kernels.backend("python")
    rng = np.random.default_rng(0)
    starts = pts[rng.choice(len(pts), size=min(256, len(pts)), replace=False)]
    modes = pts[rng.choice(len(pts), size=min(200, len(pts)), replace=False)]
    no_known = np.empty((0, pts.shape[1]))
    rods = init_first_frame(SimParams(n_objects=220, seed=1))
    cases = {
        "shift_seeds (256 seeds)": lambda impl: impl.shift_seeds(pts, starts, 0.4, 1e-4, 100, no_known, 0.0, 1),
        "nearest_mode (200 modes)": lambda impl: impl.nearest_mode(pts, modes, 1),
        "paint_rods (220 rods)": None,
    }
    for name, call in cases.items():
        saved = kernels._impl
        timings = {}
        for label, impl in (("cython", compiled), ("python", numpy_impl)):
            if call is None:
                kernels._impl = impl
                t, _ = best_of(lambda: rasterize(rods, 550), repeat)
                kernels._impl = saved
            else:
                t, _ = best_of(lambda: call(impl), repeat)
            timings[label] = t
        rows.append({"kernel": name, **timings, "speedup": timings["python"] / timings["cython"]})
    return rows


def bench_seeded(pts, repeat):
    p = MeanShiftParams()
    t_seeded, (_, seeded) = best_of(lambda: mean_shift(pts, p, np.random.default_rng(0)), repeat)
    brute_params = MeanShiftParams(seed_fraction=1.0)
    t_brute, (_, brute) = best_of(
        lambda: mean_shift(pts, brute_params, np.random.default_rng(0), skip_covered=False), 1)
    return {"points": int(len(pts)), "seeded_s": t_seeded, "brute_force_s": t_brute,
            "speedup": t_brute / t_seeded, "identical_partitions": bool(same_partition(seeded, brute))}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--objects", type=int, default=275, help="rods in the frame (275 gives ~30k fg px)")
    parser.add_argument("--sigma", type=float, default=0.0)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", help="also write the results here")
    args = parser.parse_args(argv)
    os.environ.setdefault("ASIST_THREADS", "1")

    pts = oracle_points(args.objects, args.sigma)
    print(f"active backend: {kernels.BACKEND}, threads: {kernels.num_threads()}, "
          f"foreground points: {len(pts)}")
    rows = bench_backends(pts, args.repeat)
    if rows:
        print(f"\n{'kernel':28s} {'cython s':>10s} {'numpy s':>10s} {'speedup':>8s}")
        for r in rows:
            print(f"{r['kernel']:28s} {r['cython']:10.4f} {r['python']:10.4f} {r['speedup']:7.1f}x")
    else:
        print("compiled kernels not built; backend comparison skipped")
    seeded = bench_seeded(pts, args.repeat)
    print(f"\nseeded mean-shift {seeded['seeded_s']:.3f}s, all-seeds brute force {seeded['brute_force_s']:.3f}s, "
          f"speedup {seeded['speedup']:.1f}x, identical partitions: {seeded['identical_partitions']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"backends": rows, "seeded": seeded}, fh, indent=2)


if __name__ == "__main__":
    main()
