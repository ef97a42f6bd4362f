"""Kernel dispatch.

The compiled extension ``asist._ckernels`` is used when it imports; otherwise
(or with ``ASIST_PURE_PYTHON=1``) the numpy implementations in
``asist._pykernels`` are used.  Both expose ``shift_seeds``, ``nearest_mode``
and ``paint_rods``.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("ASIST_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def backend(name: str | None = None):
    """Return a kernel module by name ("cython" or "python"); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def num_threads() -> int:
    """Worker threads for parallel kernels, capped by ``ASIST_THREADS``."""
    raw = os.environ.get("ASIST_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def shift_seeds(points, starts, bandwidth, tol, max_iters, known=None, stop_radius=0.0):
    if known is None:
        known = np.empty((0, points.shape[1]))
    points = np.ascontiguousarray(points, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    known = np.ascontiguousarray(known, dtype=np.float64)
    return _impl.shift_seeds(points, starts, float(bandwidth), float(tol), int(max_iters),
                             known, float(stop_radius), num_threads())


def nearest_mode(points, modes):
    points = np.ascontiguousarray(points, dtype=np.float64)
    modes = np.ascontiguousarray(modes, dtype=np.float64)
    return _impl.nearest_mode(points, modes, num_threads())


def paint_rods(labels, geom, ids):
    return _impl.paint_rods(labels, geom, ids)
