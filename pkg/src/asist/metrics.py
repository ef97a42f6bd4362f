"""DET / SEG / TRA scores from acyclic oriented graph matching (AOGM).

A reference node is matched to the computed node covering strictly more than
half of its pixels.  The AOGM cost is the weighted number of graph edits
needed to turn the computed tracking graph into the reference one; TRA and
DET normalise it by the cost of building the reference from nothing.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    LabelVideo,
    Node,
    TrackingGraph,
    build_tracking_graph,
    frame_regions,
)
from .errors import IncompatibleInputsError, InvalidInputError, ParameterError


@dataclass(frozen=True)
class AogmWeights:
    w_ns: float = 5.0
    w_fn: float = 10.0
    w_fp: float = 1.0
    w_ed: float = 1.0
    w_ea: float = 1.5
    w_ec: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value >= 0:
                raise ParameterError(f"AOGM weight {name} must be >= 0, got {value}")

    def nodes_only(self) -> "AogmWeights":
        return AogmWeights(self.w_ns, self.w_fn, self.w_fp, 0.0, 0.0, 0.0)


@dataclass
class OpCounts:
    ns: int = 0
    fn: int = 0
    fp: int = 0
    ed: int = 0
    ea: int = 0
    ec: int = 0

    def cost(self, w: AogmWeights) -> float:
        return (w.w_ns * self.ns + w.w_fn * self.fn + w.w_fp * self.fp
                + w.w_ed * self.ed + w.w_ea * self.ea + w.w_ec * self.ec)

    def as_dict(self) -> dict[str, int]:
        return {k.upper(): v for k, v in asdict(self).items()}


@dataclass
class MetricsReport:
    det: float
    seg: float
    tra: float
    aogm_cost: float
    aogm_empty_cost: float
    aogm_d_cost: float
    aogm_d_empty_cost: float
    op_counts: OpCounts
    weights: AogmWeights
    matched_pairs: list[tuple[Node, Node, float]] = field(default_factory=list)

    def to_dict(self, with_pairs: bool = False) -> dict:
        out = {
            "det": self.det,
            "seg": self.seg,
            "tra": self.tra,
            "aogm_cost": self.aogm_cost,
            "aogm_empty_cost": self.aogm_empty_cost,
            "aogm_d_cost": self.aogm_d_cost,
            "aogm_d_empty_cost": self.aogm_d_empty_cost,
            "op_counts": self.op_counts.as_dict(),
            "weights": asdict(self.weights),
        }
        if with_pairs:
            out["matched_pairs"] = [
                [list(r), list(c), j] for r, c, j in self.matched_pairs
            ]
        return out


def match_nodes(ref_frame: np.ndarray, comp_frame: np.ndarray) -> dict[int, int | None]:
    """Map every reference id in the frame to the comp id covering > 50% of it, or None."""
    ref_frame = np.asarray(ref_frame)
    comp_frame = np.asarray(comp_frame)
    if ref_frame.shape != comp_frame.shape:
        raise IncompatibleInputsError(
            f"frame shapes differ: {ref_frame.shape} vs {comp_frame.shape}"
        )
    ref = ref_frame.ravel().astype(np.int64)
    comp = comp_frame.ravel().astype(np.int64)
    fg = ref > 0
    out: dict[int, int | None] = {int(i): None for i in np.unique(ref[fg])}
    if not out:
        return out
    base = int(comp.max()) + 1
    keys, counts = np.unique(ref[fg] * base + comp[fg], return_counts=True)
    ids, sizes = np.unique(ref[fg], return_counts=True)
    size = dict(zip(ids.tolist(), sizes.tolist()))
    for key, n in zip(keys.tolist(), counts.tolist()):
        r, c = divmod(key, base)
        if c > 0 and 2 * n > size[r]:
            out[r] = c
    return out


def _graph_frame(graph: TrackingGraph, t: int) -> np.ndarray:
    _, h, w = graph.shape
    flat = np.zeros(h * w, dtype=np.int64)
    for node in graph.frame_nodes(t):
        flat[graph.node_pixels[node]] = node[1]
    return flat.reshape(h, w)


def graph_matching(ref: TrackingGraph, comp: TrackingGraph) -> dict[Node, Node | None]:
    if tuple(ref.shape) != tuple(comp.shape):
        raise IncompatibleInputsError(f"graph shapes differ: {ref.shape} vs {comp.shape}")
    out: dict[Node, Node | None] = {}
    for t in range(ref.shape[0]):
        if not ref.frame_nodes(t):
            continue
        for r, c in match_nodes(_graph_frame(ref, t), _graph_frame(comp, t)).items():
            out[(t, r)] = None if c is None else (t, c)
    return out


def _count_ops(ref: TrackingGraph, comp: TrackingGraph, match: dict[Node, Node | None]) -> OpCounts:
    ops = OpCounts()
    hits: dict[Node, int] = {}
    for r, c in match.items():
        if c is None:
            ops.fn += 1
        else:
            hits[c] = hits.get(c, 0) + 1
    ops.ns = sum(k - 1 for k in hits.values() if k > 1)
    ops.fp = sum(1 for c in comp.node_pixels if c not in hits)

    # reference edges grouped by the computed edge their endpoints induce
    induced: dict[tuple[Node, Node], list[str]] = {}
    for (a, b), kind in ref.edges.items():
        ca, cb = match.get(a), match.get(b)
        if ca is None or cb is None:
            ops.ea += 1
        else:
            induced.setdefault((ca, cb), []).append(kind)
    for edge, kind in comp.edges.items():
        kinds = induced.pop(edge, None)
        if kinds is None:
            ops.ed += 1
            continue
        # one computed edge can stand for only one reference edge
        ops.ea += len(kinds) - 1
        if kind not in kinds:
            ops.ec += 1
    ops.ea += sum(len(kinds) for kinds in induced.values())
    return ops


def aogm_cost(ref: TrackingGraph, comp: TrackingGraph, w: AogmWeights = AogmWeights()) -> tuple[float, OpCounts]:
    ops = _count_ops(ref, comp, graph_matching(ref, comp))
    return ops.cost(w), ops


def empty_cost(ref: TrackingGraph, w: AogmWeights = AogmWeights()) -> float:
    """Cost of building ``ref`` from an empty graph."""
    return w.w_fn * len(ref.node_pixels) + w.w_ea * len(ref.edges)


def _normalised(cost: float, empty: float) -> float:
    if empty <= 0:
        raise InvalidInputError("reference graph is empty; the score is undefined")
    return 1.0 - min(cost, empty) / empty


def tra_score(ref: TrackingGraph, comp: TrackingGraph, w: AogmWeights = AogmWeights()) -> float:
    cost, _ = aogm_cost(ref, comp, w)
    return _normalised(cost, empty_cost(ref, w))


def det_score(ref: TrackingGraph, comp: TrackingGraph, w: AogmWeights = AogmWeights()) -> float:
    wd = w.nodes_only()
    cost, _ = aogm_cost(ref, comp, wd)
    return _normalised(cost, empty_cost(ref, wd))


def _seg_pairs(ref: LabelVideo, comp: LabelVideo) -> list[tuple[Node, Node | None, float]]:
    if ref.shape != comp.shape:
        raise IncompatibleInputsError(f"video shapes differ: {ref.shape} vs {comp.shape}")
    out = []
    for t in range(ref.n_frames):
        match = match_nodes(ref.frames[t], comp.frames[t])
        if not match:
            continue
        ref_px = frame_regions(ref.frames[t])
        comp_px = frame_regions(comp.frames[t])
        for r, c in sorted(match.items()):
            if c is None:
                out.append(((t, r), None, 0.0))
                continue
            a, b = ref_px[r], comp_px[c]
            inter = np.intersect1d(a, b, assume_unique=True).size
            out.append(((t, r), (t, c), inter / (a.size + b.size - inter)))
    return out


def seg_score(ref: LabelVideo, comp: LabelVideo) -> float:
    pairs = _seg_pairs(ref, comp)
    if not pairs:
        raise InvalidInputError("reference video has no objects; SEG is undefined")
    return float(np.mean([j for _, _, j in pairs]))


def evaluate(ref: LabelVideo, comp: LabelVideo, w: AogmWeights = AogmWeights()) -> MetricsReport:
    if ref.shape != comp.shape:
        raise IncompatibleInputsError(
            f"reference is {ref.shape} (T, H, W) but result is {comp.shape}"
        )
    ref_g = build_tracking_graph(ref)
    comp_g = build_tracking_graph(comp)
    ops = _count_ops(ref_g, comp_g, graph_matching(ref_g, comp_g))
    wd = w.nodes_only()
    cost, cost0 = ops.cost(w), empty_cost(ref_g, w)
    dcost, dcost0 = ops.cost(wd), empty_cost(ref_g, wd)
    pairs = _seg_pairs(ref, comp)
    if not pairs:
        raise InvalidInputError("reference video has no objects; scores are undefined")
    return MetricsReport(
        det=_normalised(dcost, dcost0),
        seg=float(np.mean([j for _, _, j in pairs])),
        tra=_normalised(cost, cost0),
        aogm_cost=cost,
        aogm_empty_cost=cost0,
        aogm_d_cost=dcost,
        aogm_d_empty_cost=dcost0,
        op_counts=ops,
        weights=w,
        matched_pairs=[(r, c, j) for r, c, j in pairs if c is not None],
    )
