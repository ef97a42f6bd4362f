"""Rod-annotation video simulation, embedding mean-shift tracking and AOGM evaluation."""

__version__ = "0.1.0"

from .core import (
    LabelVideo,
    TrackRecord,
    TrackingGraph,
    build_tracking_graph,
    jaccard,
    relabel_canonical,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "LabelVideo",
    "TrackRecord",
    "TrackingGraph",
    "build_tracking_graph",
    "jaccard",
    "relabel_canonical",
]
