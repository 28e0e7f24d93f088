"""Exact laws at small n.

Two independent routes:

* distributional recursions in rational arithmetic (split law, isolation law,
  binary search tree shapes);
* exhaustive enumeration of every increasing tree paired with every edge
  removal order.  Components are tracked forward as vertex bitmasks, which
  shares no code with the reverse union-find replay used by the samplers.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from .core_tree import enumerate_increasing_trees, canonical_relabel
from .errors import SizeCapError

ISOLATION_LAW_CAP = 200
EXHAUSTIVE_CAP = 6
SPLIT_CHECK_CAP = 5


@dataclass(frozen=True)
class ExactDistribution:
    """Finite law with rational probabilities, support sorted ascending."""

    support: tuple[int, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if any(a >= b for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")
        if sum(self.probs, Fraction(0)) != 1:
            raise ValueError("probabilities do not sum to 1")

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "ExactDistribution":
        total = sum(counts.values())
        keys = sorted(k for k, c in counts.items() if c)
        return cls(tuple(int(k) for k in keys), tuple(Fraction(int(counts[k]), total) for k in keys))

    @classmethod
    def from_weights(cls, weights: Mapping[int, Fraction]) -> "ExactDistribution":
        keys = sorted(k for k, w in weights.items() if w)
        return cls(tuple(int(k) for k in keys), tuple(Fraction(weights[k]) for k in keys))

    def pmf(self) -> dict[int, Fraction]:
        return dict(zip(self.support, self.probs))

    def prob(self, x: int) -> Fraction:
        return self.pmf().get(x, Fraction(0))

    def mean(self) -> Fraction:
        return sum((Fraction(x) * p for x, p in zip(self.support, self.probs)), Fraction(0))

    def variance(self) -> Fraction:
        m = self.mean()
        return sum((Fraction(x) ** 2 * p for x, p in zip(self.support, self.probs)), Fraction(0)) - m * m

    def max_deviation(self, other: "ExactDistribution") -> Fraction:
        a, b = self.pmf(), other.pmf()
        return max(abs(a.get(k, Fraction(0)) - b.get(k, Fraction(0))) for k in set(a) | set(b))

    def as_float(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.support), np.array([float(p) for p in self.probs])


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise SizeCapError(f"{what} limited to n <= {cap}, got {n}")


def split_probability(n: int, j: int) -> Fraction:
    """P(xi = j | xi <= n) for P(xi = j) = 1/(j(j+1))."""
    return Fraction(n + 1, n * j * (j + 1))


def exact_split_law(n: int) -> ExactDistribution:
    """Law of the size of the subtree cut off by a uniform first edge."""
    if n < 1:
        raise ValueError("need n >= 1")
    return ExactDistribution(tuple(range(1, n + 1)), tuple(split_probability(n, j) for j in range(1, n + 1)))


def exact_isolation_law(n: int) -> ExactDistribution:
    """Law of the root isolation count via X_m = 1 + X_{m - D_m}, X_0 = 0."""
    if n < 0:
        raise ValueError("need n >= 0")
    _check_cap(n, ISOLATION_LAW_CAP, "exact_isolation_law")
    # laws[m] maps value -> probability
    laws: list[dict[int, Fraction]] = [{0: Fraction(1)}]
    for m in range(1, n + 1):
        law: dict[int, Fraction] = {}
        for j in range(1, m + 1):
            w = split_probability(m, j)
            for x, p in laws[m - j].items():
                law[x + 1] = law.get(x + 1, Fraction(0)) + w * p
        laws.append(law)
    return ExactDistribution.from_weights(laws[n])


def bst_shape_law(n: int) -> ExactDistribution:
    """Shape law of a binary search tree grown from n uniform insertions.

    Each insertion falls into a uniform external leaf, which becomes an
    internal node with two leaves.  Shapes are reported as preorder codes
    (see :func:`binary_code`).
    """
    if n < 0:
        raise ValueError("need n >= 0")
    _check_cap(n, 10, "bst_shape_law")
    law: dict[tuple, Fraction] = {(): Fraction(1)}
    for i in range(n):
        nxt: dict[tuple, Fraction] = {}
        for shape, p in law.items():
            grown = _grow_each_leaf(shape)
            w = p / len(grown)
            for g in grown:
                nxt[g] = nxt.get(g, Fraction(0)) + w
        law = nxt
    return ExactDistribution.from_weights({binary_code(s): p for s, p in law.items()})


def _grow_each_leaf(shape: tuple) -> list[tuple]:
    if shape == ():
        return [((), ())]
    left, right = shape
    return [(g, right) for g in _grow_each_leaf(left)] + [(left, g) for g in _grow_each_leaf(right)]


def binary_code(shape: tuple) -> int:
    """Preorder code of a nested-tuple binary tree: 1 per internal node, 0 per leaf, leading 1."""
    code = 1
    stack = [shape]
    while stack:
        s = stack.pop()
        if s == ():
            code = code * 2
        else:
            code = code * 2 + 1
            stack.append(s[1])
            stack.append(s[0])
    return code


def plane_code(node_parent: Iterable[int]) -> int:
    """Preorder code of a plane tree given by creation-ordered parent links.

    Nodes are 0..m-1, ``node_parent[k] < k`` or -1 for children of an
    implicit root; children are ordered by index.  Entering a child emits
    1, leaving it emits 0; a leading 1 keeps sizes apart.
    """
    par = list(node_parent)
    kids: list[list[int]] = [[] for _ in range(len(par) + 1)]
    for k, p in enumerate(par):
        kids[p + 1].append(k + 1)
    code = 1
    stack: list[tuple[int, int]] = [(0, 0)]
    while stack:
        v, i = stack.pop()
        if i < len(kids[v]):
            stack.append((v, i + 1))
            code = code * 2 + 1
            stack.append((kids[v][i], 0))
        elif v != 0:
            code = code * 2
    return code


# ---------------------------------------------------------------------------
# exhaustive enumeration


@dataclass(frozen=True)
class DestructionTable:
    """Per-step records for every (tree, order) pair at size n.

    Row r covers tree ``r // n!`` and order ``r % n!`` (lexicographic).
    ``comp[r, k]`` is the bitmask of the component holding the edge removed
    at step k and ``part[r, k]`` the bitmask of its child side.
    """

    n: int
    parents: np.ndarray  # (n!, n+1)
    orders: np.ndarray  # (n!, n)
    edge: np.ndarray  # (rows, n)
    comp: np.ndarray
    part: np.ndarray

    @property
    def rows(self) -> int:
        return self.edge.shape[0]


_POP = np.array([bin(i).count("1") for i in range(1 << 8)], dtype=np.int64)


def _popcount(x: np.ndarray) -> np.ndarray:
    # masks fit in n+1 <= 7 bits
    return _POP[x]


@lru_cache(maxsize=None)
def destruction_table(n: int) -> DestructionTable:
    if n < 1:
        raise ValueError("need n >= 1")
    _check_cap(n, EXHAUSTIVE_CAP, "exhaustive enumeration")
    trees = enumerate_increasing_trees(n)
    orders = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)
    n_ord = orders.shape[0]
    n1 = n + 1
    edges_all, comp_all, part_all = [], [], []
    for t in trees:
        par = t.parent
        sub = np.zeros(n1, dtype=np.int64)
        for v in range(n, -1, -1):
            sub[v] |= 1 << v
            if v:
                sub[par[v]] |= sub[v]
        cmask = np.full((n_ord, n1), (1 << n1) - 1, dtype=np.int64)
        comp = np.empty((n_ord, n), dtype=np.int64)
        part = np.empty((n_ord, n), dtype=np.int64)
        rows = np.arange(n_ord)
        for k in range(n):
            e = orders[:, k]
            m = cmask[rows, e]
            p = m & sub[e]
            rest = m & ~p
            comp[:, k] = m
            part[:, k] = p
            for v in range(n1):
                bit = 1 << v
                in_p = (p & bit) != 0
                in_r = (rest & bit) != 0
                cmask[:, v] = np.where(in_p, p, np.where(in_r, rest, cmask[:, v]))
        edges_all.append(orders)
        comp_all.append(comp)
        part_all.append(part)
    return DestructionTable(
        n,
        np.array([t.parent for t in trees]),
        orders,
        np.concatenate(edges_all),
        np.concatenate(comp_all),
        np.concatenate(part_all),
    )


def _mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


def _targets_count(tab: DestructionTable, tmask: int) -> np.ndarray:
    return np.count_nonzero(tab.comp & tmask, axis=1)


def _disconnect_steps(tab: DestructionTable, tmask: int, k: int) -> np.ndarray:
    """Step count until the targets in ``tmask`` first occupy k components."""
    counted = _popcount(tab.comp & tmask) >= 2
    rest = tab.comp & ~tab.part
    split = counted & ((tab.part & tmask) != 0) & ((rest & tmask) != 0)
    running = np.cumsum(counted, axis=1)
    nsplit = np.cumsum(split, axis=1)
    # first step at which k-1 splits have happened
    first = np.argmax(nsplit >= k - 1, axis=1)
    return running[np.arange(tab.rows), first]


def _law_over_target_sets(tab: DestructionTable, sets: Iterable[tuple[int, ...]], fn: Callable) -> ExactDistribution:
    counts: Counter = Counter()
    for s in sets:
        vals, c = np.unique(fn(tab, _mask(s)), return_counts=True)
        for v, ci in zip(vals.tolist(), c.tolist()):
            counts[v] += ci
    return ExactDistribution.from_counts(counts)


def _law(values: np.ndarray) -> ExactDistribution:
    vals, c = np.unique(values, return_counts=True)
    return ExactDistribution.from_counts(dict(zip(vals.tolist(), c.tolist())))


def _component_tree_codes(tab: DestructionTable) -> np.ndarray:
    n = tab.n
    rank = np.empty((tab.rows, n + 1), dtype=np.int64)
    rank[:, 0] = -1
    rank[np.arange(tab.rows)[:, None], tab.edge] = np.arange(n)
    low = tab.comp & -tab.comp
    root = np.log2(low).astype(np.int64)
    node_parent = rank[np.arange(tab.rows)[:, None], root]
    uniq, inv = np.unique(node_parent, axis=0, return_inverse=True)
    codes = np.array([plane_code(row) for row in uniq], dtype=object)
    return codes[inv.ravel()]


def _ordered_cut_tree_code(parent: np.ndarray) -> int:
    """Cut-tree shape of the natural removal order, built block by block."""
    n1 = parent.size
    sub = [1 << v for v in range(n1)]
    for v in range(n1 - 1, 0, -1):
        sub[parent[v]] |= sub[v]
    steps = []
    comp = {v: (1 << n1) - 1 for v in range(n1)}
    for e in range(1, n1):
        m = comp[e]
        p = m & sub[e]
        steps.append((m, p))
        for v in range(n1):
            if p >> v & 1:
                comp[v] = p
            elif (m & ~p) >> v & 1:
                comp[v] = m & ~p

    def shape(block):
        if block & (block - 1) == 0:
            return ()
        m, p = next(s for s in steps if s[0] == block)
        return (shape(m & ~p), shape(p))

    return binary_code(shape((1 << n1) - 1))


STATISTICS = (
    "X",
    "X_ell",
    "Y",
    "Y_random",
    "Z",
    "A",
    "B",
    "first_cut_size",
    "leaf_depth",
    "component_tree_shape",
    "ordered_cut_tree_shape",
    "gm_collisions",
)


def exhaustive_destruction(n: int, statistic: str, **params) -> ExactDistribution:
    """Exact law of a destruction statistic over all n! trees and n! orders.

    Statistics and their parameters:

    * ``X``: cuts to isolate the root.
    * ``X_ell`` (``ell``): cuts to isolate 0..ell-1.
    * ``Y`` (``targets``): cuts to isolate a fixed target set.
    * ``Y_random`` (``ell``): cuts to isolate ell i.i.d. uniform vertices.
    * ``Z`` (``ell``): cuts to isolate the last ell vertices.
    * ``A`` (``ell``, ``k``): steps until ell vertices drawn without
      replacement occupy k components.
    * ``B`` (``ell``, ``k``): the same for the vertices 0..ell-1.
    * ``first_cut_size``: size of the part cut off by the first removal.
    * ``leaf_depth`` (``v``): cuts falling in components containing v.
    * ``component_tree_shape``: plane code of the tree of component sizes.
    * ``ordered_cut_tree_shape``: binary code of the cut-tree under the
      natural order (one tree per increasing tree; orders do not matter).
    * ``gm_collisions``: collisions of the coalescent read off the tree
      with labels 1..n+1, i.e. edges that ring while attached to the root.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    _check_cap(n, EXHAUSTIVE_CAP, "exhaustive_destruction")
    if n < 1:
        raise ValueError("need n >= 1")
    tab = destruction_table(n)
    all_v = range(n + 1)
    if statistic in ("X", "gm_collisions"):
        return _law(_targets_count(tab, 1))
    if statistic == "X_ell":
        return _law(_targets_count(tab, _mask(range(params["ell"]))))
    if statistic == "Y":
        return _law(_targets_count(tab, _mask(params["targets"])))
    if statistic == "Y_random":
        tuples = itertools.product(all_v, repeat=params["ell"])
        return _law_over_target_sets(tab, tuples, _targets_count)
    if statistic == "Z":
        ell = params["ell"]
        return _law(_targets_count(tab, _mask(range(n - ell + 1, n + 1))))
    if statistic == "A":
        sets = itertools.combinations(all_v, params["ell"])
        k = params.get("k", 2)
        return _law_over_target_sets(tab, sets, lambda tb, m: _disconnect_steps(tb, m, k))
    if statistic == "B":
        return _law(_disconnect_steps(tab, _mask(range(params["ell"])), params.get("k", 2)))
    if statistic == "first_cut_size":
        return _law(_popcount(tab.part[:, 0]))
    if statistic == "leaf_depth":
        return _law(_targets_count(tab, 1 << params["v"]))
    if statistic == "component_tree_shape":
        codes = _component_tree_codes(tab)
        return ExactDistribution.from_counts(Counter(codes.tolist()))
    # ordered_cut_tree_shape
    counts = Counter(_ordered_cut_tree_code(p) for p in tab.parents)
    return ExactDistribution.from_counts(counts)


# ---------------------------------------------------------------------------
# conditional splitting


@dataclass(frozen=True)
class SplitCheck:
    j: int
    passed: bool
    max_deviation: Fraction


@dataclass(frozen=True)
class SplitCheckReport:
    n: int
    checks: tuple[SplitCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> Fraction:
        return max(c.max_deviation for c in self.checks)


def exact_conditional_split_check(n: int) -> SplitCheckReport:
    """Check that, given the cut-off size j, the two relabeled parts of a
    uniform tree split at a uniform edge are independent uniform trees."""
    if n < 1:
        raise ValueError("need n >= 1")
    _check_cap(n, SPLIT_CHECK_CAP, "exact_conditional_split_check")
    buckets: dict[int, Counter] = {}
    for t in enumerate_increasing_trees(n):
        par = [int(x) for x in t.parent]
        children = t.children()
        for e in range(1, n + 1):
            below = set()
            stack = [e]
            while stack:
                x = stack.pop()
                below.add(x)
                stack.extend(children[x])
            above = set(range(n + 1)) - below
            t0 = canonical_relabel(above, {v: par[v] for v in above if v != 0})
            ts = canonical_relabel(below, {v: par[v] for v in below if v != e})
            buckets.setdefault(len(below), Counter())[(t0.key(), ts.key())] += 1
    checks = []
    for j in range(1, n + 1):
        counts = buckets.get(j, Counter())
        total = sum(counts.values())
        expected = Fraction(1, math.factorial(n - j) * math.factorial(j - 1))
        dev = Fraction(0)
        for a in enumerate_increasing_trees(n - j):
            for b in enumerate_increasing_trees(j - 1):
                got = Fraction(counts.get((a.key(), b.key()), 0), total) if total else Fraction(0)
                dev = max(dev, abs(got - expected))
        checks.append(SplitCheck(j, dev == 0, dev))
    return SplitCheckReport(n, tuple(checks))
