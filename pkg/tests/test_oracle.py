import itertools

import numpy as np
import pytest

from asist.core import LabelVideo, TrackRecord
from asist.errors import InvalidInputError, ParameterError
from asist.oracle import EmbeddingVideo, OracleParams, anchor_vectors, embed_labels


def two_track_video():
    f = np.zeros((3, 20, 20), dtype=np.int32)
    f[:, 2:6, 2:8] = 1
    f[:, 10:18, 5:15] = 2
    return LabelVideo(f, (TrackRecord(1, 0, 2), TrackRecord(2, 0, 2)))


def test_params_reject_low_dim():
    with pytest.raises(ParameterError):
        OracleParams(dim=1)
    with pytest.raises(ParameterError):
        OracleParams(noise_sigma=-0.1)


def test_noiseless_constant_per_track_and_zero_background():
    v = two_track_video()
    e = embed_labels(v, OracleParams(seed=3))
    assert e.data.shape == (3, 20, 20, 8) and e.data.dtype == np.float32
    assert not e.data[v.frames == 0].any()
    vecs = {}
    for tid in (1, 2):
        px = e.data[v.frames == tid]
        assert (px == px[0]).all()
        vecs[tid] = px[0].astype(np.float64)
        assert abs(np.linalg.norm(vecs[tid]) - 1.0) < 1e-6
    assert not np.array_equal(vecs[1], vecs[2])


def test_anchor_unit_norm():
    anchors = anchor_vectors(range(1, 50), OracleParams(seed=1))
    for a in anchors.values():
        assert abs(np.linalg.norm(a) - 1.0) < 1e-9


def test_anchor_separation_without_guard():
    anchors = np.array(list(anchor_vectors(range(1, 47), OracleParams(seed=5, min_separation=0.0)).values()))
    dists = [np.linalg.norm(a - b) for a, b in itertools.combinations(anchors, 2)]
    assert len(dists) >= 1000
    assert min(dists) > 0.05


def test_anchor_guard_enforces_separation():
    anchors = np.array(list(anchor_vectors(range(1, 301), OracleParams(seed=42)).values()))
    d = np.linalg.norm(anchors[:, None] - anchors[None], axis=2)
    assert d[np.triu_indices(len(anchors), 1)].min() >= 0.6


def test_anchor_guard_gives_up():
    with pytest.raises(ParameterError):
        anchor_vectors(range(1, 10), OracleParams(dim=2, min_separation=1.9))


def test_noise_variance_bound():
    f = np.zeros((1, 120, 120), dtype=np.int32)
    f[0, 10:110, 10:110] = 1  # 10^4 pixels
    v = LabelVideo(f, (TrackRecord(1, 0, 0),))
    e = embed_labels(v, OracleParams(noise_sigma=0.05, seed=8))
    px = e.data[0][f[0] == 1].astype(np.float64)
    var = px.var(axis=0, ddof=1)
    assert ((var >= 0.0020) & (var <= 0.0030)).all()


def test_determinism_and_seed_dependence():
    v = two_track_video()
    p = OracleParams(noise_sigma=0.1, seed=4)
    a = embed_labels(v, p).data
    assert np.array_equal(a, embed_labels(v, p).data)
    assert not np.array_equal(a, embed_labels(v, OracleParams(noise_sigma=0.1, seed=5)).data)


def test_anchors_independent_of_other_tracks():
    # an id's anchor comes from its own stream, so it does not depend on which ids come later
    a = anchor_vectors([1, 2], OracleParams(seed=2))
    b = anchor_vectors([1, 2, 3, 4], OracleParams(seed=2))
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])


def test_embedding_video_validation():
    with pytest.raises(InvalidInputError):
        EmbeddingVideo(np.zeros((2, 2, 2)))
    with pytest.raises(InvalidInputError):
        EmbeddingVideo(np.full((1, 1, 1, 2), np.nan))
