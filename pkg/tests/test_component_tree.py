import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrtcut.component_tree import (
    UniversalIndex,
    build_component_tree,
    generation_slice,
    plane_code,
    rank_and_normalize,
    rank_sizes,
)
from rrtcut.core_tree import IncreasingTree, enumerate_increasing_trees, sample_rrt
from rrtcut.destruction import DestructionTrace, isolate_root, sample_destruction
from rrtcut.errors import StructureError
from rrtcut.oracle import ExactDistribution, exhaustive_destruction
from rrtcut.stats import chi_square


@st.composite
def traces(draw, max_n=25):
    n = draw(st.integers(1, max_n))
    t = IncreasingTree.from_parents([draw(st.integers(0, i - 1)) for i in range(1, n + 1)])
    return DestructionTrace(t, np.array(draw(st.permutations(range(1, n + 1)))))


def test_universal_index():
    u = UniversalIndex((2, 1))
    assert u.generation == 2
    assert u.child(3).path == (2, 1, 3)
    assert u.parent() == UniversalIndex((2,))
    with pytest.raises(ValueError):
        UniversalIndex((0,))
    with pytest.raises(ValueError):
        UniversalIndex().parent()


def test_single_edge():
    ct = build_component_tree(DestructionTrace(IncreasingTree.path(1), np.array([1])))
    assert ct.sizes.tolist() == [2, 1]
    assert ct.generation_one_sizes() == [1]


def test_eleven_vertex_worked_example():
    # worked by hand: cutting 3, 9, 1, 10, 5, 7, 2, 4, 8, 6 severs
    # {3,6,7,10} {9} {1,4,8} | {10} | {5} | {7} | {2} | {4,8} | {8} | {6}
    t = IncreasingTree.from_parents([0, 0, 1, 1, 2, 3, 3, 4, 0, 6])
    tr = DestructionTrace(t, np.array([3, 9, 1, 10, 5, 7, 2, 4, 8, 6]))
    ct = build_component_tree(tr)
    assert ct.sizes.tolist() == [11, 4, 1, 3, 1, 1, 1, 1, 2, 1, 1]
    assert ct.node_parent.tolist() == [-1, 0, 0, 0, 1, 0, 1, 0, 3, 8, 1]
    assert ct.child_sizes(0) == [4, 1, 3, 1, 1]
    assert ct.child_sizes(1) == [1, 1, 1]
    assert ct.child_sizes(3) == [2]
    assert ct.child_sizes(8) == [1]
    assert isolate_root(tr).cuts == 5


@settings(max_examples=100, deadline=None)
@given(traces())
def test_conservation_and_root_children(tr):
    ct = build_component_tree(tr)
    ct.check()
    res = isolate_root(tr)
    assert len(ct.children(0)) == res.cuts
    assert ct.generation_one_sizes() == list(res.severed_sizes)
    for x in range(ct.n_nodes):
        assert ct.sizes[x] == 1 + sum(ct.child_sizes(x))


def test_check_rejects_bad_sizes():
    ct = build_component_tree(sample_destruction(sample_rrt(10, 1), 1))
    ct.sizes[1] += 1
    with pytest.raises(StructureError):
        ct.check()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30).flatmap(lambda n: st.lists(st.integers(0, 10**6), min_size=n, max_size=n)))
def test_ordered_component_tree_is_the_tree_itself(draw_parents):
    parents = [p % (i + 1) for i, p in enumerate(draw_parents)]
    t = IncreasingTree.from_parents(parents)
    ct = build_component_tree(DestructionTrace.natural(t))
    # node i is the part cut off with edge i, hanging from the node of parent(i)
    assert ct.node_parent[1:].tolist() == parents


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_shape_law_matches_oracle(n):
    codes = Counter()
    for t in enumerate_increasing_trees(n):
        for perm in itertools.permutations(range(1, n + 1)):
            codes[plane_code(build_component_tree(DestructionTrace(t, np.array(perm))))] += 1
    assert ExactDistribution.from_counts(codes) == exhaustive_destruction(n, "component_tree_shape")


def test_rank_sizes_examples():
    assert rank_sizes([3, 7, 1], 1) == [7, 3, 1]


def test_rank_sizes_ties_uniform():
    rng = np.random.default_rng(2)
    ct = build_component_tree(DestructionTrace(IncreasingTree.star(2), np.array([1, 2])))
    first = Counter(int(rank_and_normalize(ct, rng).children(0)[0]) for _ in range(4000))
    assert set(first) == {1, 2}
    assert chi_square([first[1], first[2]], [0.5, 0.5])[1] > 1e-3


@settings(max_examples=60, deadline=None)
@given(traces(), st.integers(0, 2**32))
def test_ranked_tree_invariants(tr, seed):
    if tr.n < 2:
        return
    ct = build_component_tree(tr)
    rt = rank_and_normalize(ct, seed)
    assert rt.z[0] == pytest.approx((tr.n + 1) / tr.n)
    ln = math.log(tr.n)
    for x in range(ct.n_nodes):
        kids = rt.children(x)
        s = ct.sizes[kids]
        assert np.all(s[:-1] >= s[1:])
        assert sorted(kids.tolist()) == sorted(ct.children(x).tolist())
        assert rt.z[x] == pytest.approx(ln ** rt.generation[x] * ct.sizes[x] / tr.n)


def test_rank_and_normalize_needs_two_edges():
    ct = build_component_tree(DestructionTrace(IncreasingTree.path(1), np.array([1])))
    with pytest.raises(ValueError):
        rank_and_normalize(ct)


def test_universal_addressing():
    t = IncreasingTree.from_parents([0, 0, 1, 1, 2, 3, 3, 4, 0, 6])
    ct = build_component_tree(DestructionTrace(t, np.array([3, 9, 1, 10, 5, 7, 2, 4, 8, 6])))
    rt = rank_and_normalize(ct, 0)
    ln = math.log(10)
    assert rt.value(UniversalIndex((1,))) == pytest.approx(4 * ln / 10)
    assert rt.value(UniversalIndex((2,))) == pytest.approx(3 * ln / 10)
    assert rt.value(UniversalIndex((2, 1))) == pytest.approx(2 * ln**2 / 10)
    assert rt.value(UniversalIndex((2, 1, 1))) == pytest.approx(ln**3 / 10)
    assert rt.value(UniversalIndex((6,))) == 0.0
    assert rt.node_at(UniversalIndex((2, 2))) is None


def test_generation_slice():
    t = IncreasingTree.from_parents([0, 0, 1, 1, 2, 3, 3, 4, 0, 6])
    ct = build_component_tree(DestructionTrace(t, np.array([3, 9, 1, 10, 5, 7, 2, 4, 8, 6])))
    rt = rank_and_normalize(ct, 0)
    ln = math.log(10)
    assert generation_slice(rt, 1, 0) == []
    assert generation_slice(rt, 1, 2) == pytest.approx([4 * ln / 10, 3 * ln / 10])
    assert generation_slice(rt, 2, 1) == pytest.approx([2 * ln**2 / 10])
    assert generation_slice(rt, 2, 5, parent=UniversalIndex((1,))) == pytest.approx([ln**2 / 10] * 3)
    assert generation_slice(rt, 2, 5, parent=UniversalIndex((5,))) == []
    with pytest.raises(ValueError):
        generation_slice(rt, 0, 1)
    with pytest.raises(ValueError):
        generation_slice(rt, 2, 1, parent=UniversalIndex())


def test_generation_one_max_matches_batch():
    from rrtcut.batch import root_batch, trial_keys, trial_tree

    n = 500
    _, _, top, _ = root_batch(n, 3, 4)
    for tr in range(4):
        trace = DestructionTrace.from_times(IncreasingTree(trial_tree(n, 3, tr)), trial_keys(n, 3, tr)[1:])
        rt = rank_and_normalize(build_component_tree(trace), 0)
        assert top[tr] == pytest.approx(generation_slice(rt, 1, 1)[0])
