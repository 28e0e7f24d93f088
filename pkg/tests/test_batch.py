import numpy as np
import pytest

from rrtcut import batch
from rrtcut.batch import (
    MODE_A,
    MODE_B,
    MODE_Y,
    MODE_Z,
    SMALL_STATS,
    _distinct_targets,
    _iid_targets,
    default_threads,
    ordered_batch,
    root_batch,
    root_degree_batch,
    run_chunks,
    small_law_batch,
    targets_batch,
    trial_keys,
    trial_order,
    trial_tree,
)
from rrtcut.core_tree import IncreasingTree, root_degree
from rrtcut.cut_tree import bst_height_saturation, build_ordered_cut_tree
from rrtcut.destruction import (
    DestructionTrace,
    disconnect_targets,
    isolate_first_ell,
    isolate_root,
    isolate_targets,
)
from rrtcut.oracle import exhaustive_destruction
from rrtcut.rng import (
    TAG_TARGETS,
    TAG_TREE,
    new_state,
    next_below,
    next_uniform,
    next_xi,
    stream_key,
    trial_rng,
)
from rrtcut.stats import chi_square


# ---------------------------------------------------------------------------
# random streams


def test_stream_keys_are_pure_and_distinct():
    assert stream_key(1, 2, 3) == stream_key(1, 2, 3)
    keys = {int(stream_key(s, t, g)) for s in range(4) for t in range(4) for g in range(4)}
    assert len(keys) == 64


def test_uniform_draws():
    st = new_state(7, 0, TAG_TREE)
    u = np.array([next_uniform(st) for _ in range(50_000)])
    assert np.all((u >= 0) & (u < 1))
    counts = np.histogram(u, bins=20, range=(0, 1))[0]
    assert chi_square(counts, [0.05] * 20)[1] > 1e-3


def test_below_and_xi_ranges():
    st = new_state(8, 1, TAG_TREE)
    b = [next_below(st, 7) for _ in range(7000)]
    assert set(b) == set(range(7))
    assert chi_square([b.count(j) for j in range(7)], [1 / 7] * 7)[1] > 1e-3
    assert min(next_xi(st) for _ in range(1000)) >= 1


def test_trial_rng_reproducible():
    a = trial_rng(5, 2, 1).random(4)
    assert np.array_equal(a, trial_rng(5, 2, 1).random(4))
    assert not np.array_equal(a, trial_rng(5, 3, 1).random(4))


def test_trial_building_blocks():
    parent = trial_tree(100, 3, 4)
    assert parent[0] == -1 and np.all(parent[1:] < np.arange(1, 101))
    key = trial_keys(100, 3, 4)
    assert key[0] == np.inf and np.all((key[1:] >= 0) & (key[1:] < 1))
    assert sorted(trial_order(100, 3, 4).tolist()) == list(range(1, 101))
    assert np.array_equal(trial_tree(100, 3, 4), parent)


def test_target_draws():
    st = new_state(1, 1, TAG_TARGETS)
    d = _distinct_targets(10, 10, st)
    assert sorted(d.tolist()) == list(range(10))
    assert np.all((_iid_targets(10, 50, st) >= 0) & (_iid_targets(10, 50, st) < 10))


# ---------------------------------------------------------------------------
# driver


def test_run_chunks_rejects_empty():
    with pytest.raises(ValueError):
        root_batch(10, 1, 0)


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv(batch.THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(batch.THREADS_ENV, "0")
    assert default_threads() == 1
    monkeypatch.delenv(batch.THREADS_ENV)
    assert default_threads() >= 1


def test_run_chunks_covers_each_trial_once():
    seen = np.zeros(37, dtype=np.int64)

    def kernel(start, stop, out):
        out[start:stop] += 1

    for threads in (1, 4, 16, 64):
        seen[:] = 0
        run_chunks(kernel, 37, (), (seen,), threads)
        assert np.all(seen == 1)


@pytest.mark.parametrize(
    "call",
    [
        lambda th: root_batch(300, 9, 50, ell=3, thresholds=(0.5, 1.0), threads=th),
        lambda th: targets_batch(300, 3, MODE_A, 9, 50, threads=th),
        lambda th: batch.percolation_batch(300, 0.7, 9, 50, top=4, threads=th),
        lambda th: batch.coupled_batch(300, 9, 50, threads=th),
        lambda th: batch.walk_batch(300, 9, 50, threads=th),
        lambda th: small_law_batch(5, "component_tree_shape", 9, 50, threads=th),
    ],
    ids=["root", "targets", "percolation", "coupled", "walk", "small"],
)
def test_thread_count_does_not_change_results(call):
    ref = call(1)
    ref = ref if isinstance(ref, tuple) else (ref,)
    for th in (4, 16):
        got = call(th)
        got = got if isinstance(got, tuple) else (got,)
        for a, b in zip(ref, got):
            assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# kernels against the Python reference implementations, trial by trial


def _trace(n, seed, tr):
    return DestructionTrace.from_times(IncreasingTree(trial_tree(n, seed, tr)), trial_keys(n, seed, tr)[1:])


def test_root_batch_matches_replay():
    n, seed = 400, 2
    x, xe, _, counts = root_batch(n, seed, 30, ell=3, thresholds=(0.25,))
    for tr in range(30):
        trace = _trace(n, seed, tr)
        res = isolate_root(trace)
        assert x[tr] == res.cuts
        assert xe[tr] == isolate_first_ell(trace, 3).total_cuts
        z = np.log(n) * np.array(res.severed_sizes) / n
        assert counts[tr, 0] == np.count_nonzero(z >= 0.25)


@pytest.mark.parametrize("mode", [MODE_Y, MODE_Z, MODE_A, MODE_B])
def test_targets_batch_matches_replay(mode):
    n, seed, ell = 300, 3, 4
    out = targets_batch(n, ell, mode, seed, 25)
    for tr in range(25):
        trace = _trace(n, seed, tr)
        st = new_state(seed, tr, TAG_TARGETS)
        if mode == MODE_Y:
            tg = _iid_targets(n + 1, ell, st).tolist()
        elif mode == MODE_Z:
            tg = list(range(n, n - ell, -1))
        elif mode == MODE_A:
            tg = _distinct_targets(n + 1, ell, st).tolist()
        else:
            tg = list(range(ell))
        if mode in (MODE_Y, MODE_Z):
            assert out[tr].tolist() == [isolate_targets(trace, tg[: k + 1]) for k in range(ell)]
        else:
            assert tuple(out[tr]) == disconnect_targets(trace, tg).counts


def test_targets_batch_errors():
    with pytest.raises(ValueError):
        targets_batch(10, 1, MODE_A, 1, 5)
    with pytest.raises(ValueError):
        targets_batch(3, 5, MODE_Y, 1, 5)


def test_multi_batch_matches_replay():
    n, seed = 200, 4
    stage, size = batch.multi_batch(n, 3, seed, 10)
    for tr in range(10):
        trace = DestructionTrace(IncreasingTree(trial_tree(n, seed, tr)), trial_order(n, seed, tr))
        res = isolate_first_ell(trace, 3)
        assert stage[tr].tolist() == list(res.per_stage_cuts)
        assert size[tr].tolist() == list(res.stage_sizes)


def test_ordered_batch_matches_cut_tree():
    n, seed = 300, 5
    deg, h, s = ordered_batch(n, seed, 10)
    assert np.array_equal(deg, root_degree_batch(n, seed, 10))
    for tr in range(10):
        t = IncreasingTree(trial_tree(n, seed, tr))
        assert deg[tr] == root_degree(t)
        assert (h[tr], s[tr]) == bst_height_saturation(build_ordered_cut_tree(t))


# ---------------------------------------------------------------------------
# small-n sampler against enumeration


SMALL_CASES = [
    ("X", {}, {}),
    ("X_ell", {"ell": 2}, {"ell": 2}),
    ("Z", {"ell": 1}, {"ell": 1}),
    ("A", {"ell": 2, "k": 2}, {"ell": 2, "k": 2}),
    ("B", {"ell": 3, "k": 3}, {"ell": 3, "k": 3}),
    ("Y_random", {"ell": 2}, {"ell": 2}),
    ("leaf_depth", {"ell": 2}, {"v": 2}),
    ("first_cut_size", {}, {}),
    ("ordered_cut_tree_shape", {}, {}),
    ("component_tree_shape", {}, {}),
    ("gm_collisions", {}, {}),
]


@pytest.mark.parametrize("stat,kw,oracle_kw", SMALL_CASES, ids=[c[0] for c in SMALL_CASES])
def test_small_law_batch_matches_enumeration(stat, kw, oracle_kw):
    n = 4
    law = exhaustive_destruction(n, stat, **oracle_kw)
    sample = small_law_batch(n, stat, 21, 40_000, **kw)
    sup, pr = law.as_float()
    counts = [int(np.count_nonzero(sample == s)) for s in sup]
    assert sum(counts) == sample.size
    assert chi_square(counts, pr)[1] > 1e-4


def test_small_law_batch_covers_every_statistic():
    assert {c[0] for c in SMALL_CASES} == set(SMALL_STATS)
    with pytest.raises(ValueError):
        small_law_batch(3, "nope", 1, 10)
    with pytest.raises(ValueError):
        small_law_batch(0, "X", 1, 10)
