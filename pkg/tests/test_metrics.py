import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asist.core import LabelVideo, TrackRecord, build_tracking_graph, empty_video, tracks_from_frames
from asist.errors import IncompatibleInputsError, InvalidInputError
from asist.metrics import (
    AogmWeights, aogm_cost, det_score, empty_cost, evaluate, match_nodes, seg_score, tra_score,
)

W = AogmWeights()


from oracles import oracle_aogm, random_instance


# ------------------------------------------------------------------ hand cases

def two_frame_ref():
    f = np.zeros((2, 10, 10), dtype=np.int32)
    f[:, 2:5, 2:5] = 1
    return LabelVideo(f, (TrackRecord(1, 0, 1),))


def test_missing_edge_hand_case():
    ref = two_frame_ref()
    comp = tracks_from_frames(ref.frames * np.array([1, 2])[:, None, None])
    assert len(comp.tracks) == 2
    g_ref, g_comp = build_tracking_graph(ref), build_tracking_graph(comp)
    cost, ops = aogm_cost(g_ref, g_comp)
    assert cost == 1.5 and ops.ea == 1 and sum(ops.as_dict().values()) == 1
    assert empty_cost(g_ref) == 21.5
    assert abs(tra_score(g_ref, g_comp) - (1 - 1.5 / 21.5)) < 1e-9
    assert abs(tra_score(g_ref, g_comp) - 0.93023) < 1e-5


def test_two_of_three_detection():
    f = np.zeros((1, 10, 10), dtype=np.int32)
    f[0, 0:2, 0:2] = 1
    f[0, 4:6, 4:6] = 2
    f[0, 8:10, 8:10] = 3
    ref = tracks_from_frames(f)
    comp = tracks_from_frames(np.where(f == 3, 0, f))
    d = det_score(build_tracking_graph(ref), build_tracking_graph(comp))
    assert abs(d - (1 - 10 / 30)) < 1e-9
    assert abs(d - 0.6667) < 1e-4


def test_seg_sixty_of_one_twenty():
    ref = np.zeros((1, 20, 20), dtype=np.int32)
    ref[0, 0:10, 0:10] = 1             # 100 px
    comp = np.zeros_like(ref)
    comp[0, 4:10, 0:10] = 1            # 60 px inside the object
    comp[0, 10:16, 0:10] = 1           # 60 px outside: total 120
    r, c = tracks_from_frames(ref), tracks_from_frames(comp)
    assert abs(seg_score(r, c) - 0.375) < 1e-9


def test_minority_overlap_is_no_match():
    ref = np.zeros((10, 10), dtype=np.int32)
    ref[:, :] = 1
    comp = np.zeros_like(ref)
    comp[:4, :] = 5
    assert match_nodes(ref, comp) == {1: None}
    comp[:5, :] = 5
    assert match_nodes(ref, comp) == {1: None}  # exactly half is not a majority
    comp[:6, :] = 5
    assert match_nodes(ref, comp) == {1: 5}


def test_split_counted_once():
    f = np.zeros((1, 10, 10), dtype=np.int32)
    f[0, 0:4, 0:4] = 1
    f[0, 0:4, 5:9] = 2
    c = np.zeros_like(f)
    c[0, 0:4, 0:9] = 1
    g_ref, g_comp = build_tracking_graph(tracks_from_frames(f)), build_tracking_graph(tracks_from_frames(c))
    cost, ops = aogm_cost(g_ref, g_comp)
    assert ops.ns == 1 and ops.fn == 0 and ops.fp == 0 and cost == 5.0


def test_single_false_positive():
    f = np.zeros((2, 10, 10), dtype=np.int32)
    f[:, 0:3, 0:3] = 1
    f[:, 6:9, 6:9] = 2
    ref = tracks_from_frames(f)
    c = f.copy()
    c[1, 4, 4] = 3
    comp = tracks_from_frames(c)
    d = det_score(build_tracking_graph(ref), build_tracking_graph(comp))
    assert abs(d - (1 - 1 / (10 * 4))) < 1e-12


def test_edge_kind_change():
    f = np.zeros((2, 6, 6), dtype=np.int32)
    f[0, 0:3, 0:3] = 1
    f[1, 0:3, 0:3] = 2
    ref = LabelVideo(f, (TrackRecord(1, 0, 0), TrackRecord(2, 1, 1, parent=1)))
    comp = LabelVideo(np.where(f > 0, 1, 0), (TrackRecord(1, 0, 1),))
    cost, ops = aogm_cost(build_tracking_graph(ref), build_tracking_graph(comp))
    assert (ops.ec, ops.ea, ops.ed) == (1, 0, 0) and cost == 1.0


def test_identity_and_empty():
    ref = two_frame_ref()
    r = evaluate(ref, ref)
    assert (r.det, r.seg, r.tra) == (1.0, 1.0, 1.0) and r.aogm_cost == 0.0
    e = evaluate(ref, empty_video(ref.shape))
    assert (e.det, e.seg, e.tra) == (0.0, 0.0, 0.0)
    assert e.aogm_cost == e.aogm_empty_cost == 21.5


def test_errors():
    ref = two_frame_ref()
    with pytest.raises(IncompatibleInputsError):
        evaluate(ref, empty_video((2, 10, 11)))
    with pytest.raises(InvalidInputError):
        evaluate(empty_video((1, 4, 4)), empty_video((1, 4, 4)))
    with pytest.raises(InvalidInputError):
        seg_score(empty_video((1, 4, 4)), empty_video((1, 4, 4)))


# ------------------------------------------------------------------ properties

def test_brute_force_equivalence_200():
    for seed in range(200):
        ref, comp = random_instance(seed)
        if not ref.tracks:
            continue
        cost, _ = aogm_cost(build_tracking_graph(ref), build_tracking_graph(comp))
        assert cost == oracle_aogm(ref, comp), seed


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_brute_force_equivalence_property(seed):
    ref, comp = random_instance(seed)
    cost, _ = aogm_cost(build_tracking_graph(ref), build_tracking_graph(comp))
    assert cost == oracle_aogm(ref, comp)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_scores_bounded_and_permutation_invariant(seed):
    ref, comp = random_instance(seed)
    if not ref.tracks:
        return
    r = evaluate(ref, comp)
    assert 0.0 <= r.det <= 1.0 and 0.0 <= r.seg <= 1.0 and 0.0 <= r.tra <= 1.0
    rng = np.random.default_rng(seed)
    ids = [t.id for t in comp.tracks]
    new = dict(zip(ids, (rng.permutation(len(ids)) + 50).tolist()))
    lut = np.zeros(int(comp.frames.max(initial=0)) + 1, dtype=np.int32)
    for old, n in new.items():
        lut[old] = n
    permuted = LabelVideo(lut[comp.frames], tuple(
        TrackRecord(new[t.id], t.first_frame, t.last_frame, new.get(t.parent, 0)) for t in comp.tracks))
    p = evaluate(ref, permuted)
    assert (p.det, p.seg, p.tra) == (r.det, r.seg, r.tra)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotonicity(seed):
    ref, _ = random_instance(seed)
    if not ref.tracks:
        return
    rng = np.random.default_rng(seed)
    g_ref = build_tracking_graph(ref)
    # delete one matched node from a perfect result
    t = int(rng.integers(0, ref.n_frames))
    ids = np.unique(ref.frames[t])
    ids = ids[ids > 0]
    if ids.size:
        f = ref.frames.copy()
        f[t][f[t] == rng.choice(ids)] = 0
        worse = build_tracking_graph(tracks_from_frames(f))
        assert tra_score(g_ref, worse) <= tra_score(g_ref, g_ref)
    # add one spurious node on background
    bg = np.argwhere(ref.frames == 0)
    if len(bg):
        k, r, c = bg[rng.integers(0, len(bg))]
        f = ref.frames.copy()
        f[k, r, c] = f.max() + 1
        noisy = build_tracking_graph(tracks_from_frames(f))
        base = build_tracking_graph(tracks_from_frames(ref.frames))
        assert det_score(g_ref, noisy) <= det_score(g_ref, base)


def test_adversarial_results_clamp_to_zero():
    ref = two_frame_ref()
    rng = np.random.default_rng(0)
    noise = rng.integers(1, 60, size=ref.shape).astype(np.int32)  # a node per pixel
    comp = tracks_from_frames(noise)
    r = evaluate(ref, comp)
    assert r.tra == 0.0 and r.det == 0.0 and 0.0 <= r.seg <= 1.0


def test_weights_nodes_only():
    w = AogmWeights(1, 2, 3, 4, 5, 6).nodes_only()
    assert (w.w_ed, w.w_ea, w.w_ec) == (0, 0, 0) and (w.w_ns, w.w_fn, w.w_fp) == (1, 2, 3)
    with pytest.raises(Exception):
        AogmWeights(w_fn=-1)
