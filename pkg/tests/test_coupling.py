import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrtcut import _replay
from rrtcut.batch import coupled_batch, root_batch, trial_keys, trial_tree, walk_batch
from rrtcut.core_tree import sample_rrt
from rrtcut.coupling import (
    CoupledIsolation,
    RandomWalkPath,
    cauchy_statistic,
    cauchy_statistic_array,
    coupled_isolation,
    sample_xi,
    sample_xi_array,
    walk_to_level,
    xi_from_uniform,
    xi_tail_from_uniform,
)
from rrtcut.destruction import IsolationResult, isolate_first_ell, sample_destruction
from rrtcut.errors import StructureError
from rrtcut.oracle import exact_isolation_law
from rrtcut.stats import chi_square, ks_statistic, uniform_cdf


def xi_pmf(j):
    return Fraction(1, j * (j + 1))


def test_xi_pmf_values():
    assert [xi_pmf(j) for j in (1, 2, 3)] == [Fraction(1, 2), Fraction(1, 6), Fraction(1, 12)]


def test_xi_inversion():
    assert xi_from_uniform(0.4) == 2
    assert xi_from_uniform(1.0) == 1
    assert xi_tail_from_uniform(1.0, 7) == 7
    with pytest.raises(ValueError):
        xi_from_uniform(0.0)
    with pytest.raises(ValueError):
        xi_tail_from_uniform(1.5, 2)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-9, 1.0))
def test_xi_inversion_lands_in_the_right_cell(u):
    # floor(1/u) = j iff u in (1/(j+1), 1/j]; float division may round across
    # a cell boundary only when 1/u is within one ulp of an integer
    j = xi_from_uniform(u)
    exact = 1 / Fraction(u)
    if abs(exact - round(exact)) > exact * Fraction(1, 2**50):
        assert Fraction(1, j + 1) < Fraction(u) <= Fraction(1, j)


def test_xi_chi_square_one_million():
    x = sample_xi_array(10**6, 1)
    cells = list(range(1, 20))
    counts = [int(np.count_nonzero(x == j)) for j in cells] + [int(np.count_nonzero(x >= 20))]
    probs = [float(xi_pmf(j)) for j in cells] + [1 / 20]
    assert chi_square(counts, probs)[1] > 1e-3


@pytest.mark.parametrize("m", [1, 10, 100])
def test_xi_tail(m):
    x = sample_xi_array(400_000, m)
    frac = np.mean(x >= m)
    se = math.sqrt(1 / m * (1 - 1 / m) / x.size) or 1e-12
    assert abs(frac - 1 / m) <= 4 * se


def test_sample_xi_scalar():
    rng = np.random.default_rng(3)
    assert all(sample_xi(rng) >= 1 for _ in range(100))


def test_walk_path_example():
    w = RandomWalkPath.from_steps([1, 1, 3], 2)
    assert w.last_passage == 2
    assert w.overshoot == 0
    assert w.sums == (0, 1, 2, 5)


def test_walk_path_validation():
    with pytest.raises(ValueError):
        RandomWalkPath(2, (1, 1))
    with pytest.raises(ValueError):
        RandomWalkPath(2, (3, 1))
    with pytest.raises(ValueError):
        RandomWalkPath(2, (0, 3))
    with pytest.raises(ValueError):
        RandomWalkPath.from_steps([1, 1], 5)
    with pytest.raises(ValueError):
        walk_to_level(0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**6), st.integers(0, 2**32))
def test_walk_invariants(n, seed):
    w = walk_to_level(n, seed)
    s = w.sums
    L = w.last_passage
    assert all(a < b for a, b in zip(s, s[1:]))
    assert s[L] <= n < s[L + 1]
    assert w.overshoot == n - s[L]


def test_walk_batch_matches_definition():
    L, over = walk_batch(1000, 4, 2000)
    assert np.all(over >= 0) and np.all(over <= 1000)
    assert np.all(L <= 1000 - over)


def test_overshoot_log_uniform():
    n = 10**6
    _, over = walk_batch(n, 8, 10_000)
    ratio = np.log1p(over) / math.log(n)
    assert ks_statistic(ratio, uniform_cdf) <= 0.1


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32))
def test_coupled_identities(n, seed):
    c = coupled_isolation(n, seed)
    c.check()
    L = c.walk.last_passage
    assert c.isolation.cuts >= L
    assert c.isolation.severed_sizes[:L] == c.walk.steps[:L]
    assert c.nested_sizes[0] == n + 1 and c.nested_sizes[-1] == 1


def test_coupled_check_rejects_mismatch():
    walk = RandomWalkPath.from_steps([2, 5], 3)
    with pytest.raises(StructureError):
        CoupledIsolation(walk, IsolationResult(1, (3,)), (4, 1)).check()
    with pytest.raises(StructureError):
        CoupledIsolation(walk, IsolationResult(0, ()), (4,)).check()


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_coupled_marginal_is_isolation_law(n):
    rng = np.random.default_rng(n)
    law = exact_isolation_law(n)
    sup, pr = law.as_float()
    x = [coupled_isolation(n, rng).isolation.cuts for _ in range(6000)]
    counts = [x.count(int(s)) for s in sup]
    assert sum(counts) == len(x)
    assert chi_square(counts, pr)[1] > 1e-3


def test_coupled_first_step_is_xi():
    rng = np.random.default_rng(9)
    first = np.array([coupled_isolation(30, rng).walk.steps[0] for _ in range(20_000)])
    cells = [1, 2, 3, 4, 5]
    counts = [int(np.count_nonzero(first == j)) for j in cells] + [int(np.count_nonzero(first >= 6))]
    probs = [float(xi_pmf(j)) for j in cells] + [1 / 6]
    assert chi_square(counts, probs)[1] > 1e-3


def test_coupled_batch_has_no_failures():
    x, L, bad = coupled_batch(2000, 3, 2000)
    assert not bad.any()
    assert np.all(x >= L)
    x2, _, _, _ = root_batch(2000, 3, 2000)
    assert np.array_equal(x, x2)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2**32))
def test_first_stage_size_from_sweep_matches_replay(n, seed):
    tr = sample_destruction(sample_rrt(n, seed), seed + 1)
    _, acc = _replay.root_path_severed(tr.parent, tr.keys())
    assert acc[1] == isolate_first_ell(tr, 2).stage_sizes[1]


def test_first_stage_size_log_uniform():
    n = 10**6
    delta = np.array(
        [_replay.root_path_severed(trial_tree(n, 21, tr), trial_keys(n, 21, tr))[1][1] for tr in range(1000)]
    )
    assert ks_statistic(np.log(delta) / math.log(n), uniform_cdf) <= 0.1


def test_cauchy_statistic():
    n = 10**5
    ln = math.log(n)
    assert cauchy_statistic(n * (ln + math.log(ln)) / ln**2, n) == pytest.approx(0.0, abs=1e-9)
    arr = cauchy_statistic_array(np.array([10.0, 20.0]), 100)
    assert arr.tolist() == pytest.approx([cauchy_statistic(10, 100), cauchy_statistic(20, 100)])
    with pytest.raises(ValueError):
        cauchy_statistic(1, 2)
    with pytest.raises(ValueError):
        cauchy_statistic_array(np.ones(2), 2)
