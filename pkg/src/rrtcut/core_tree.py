"""Increasing trees on {0, ..., n} stored as flat parent arrays.

Edge ``i`` (for ``i >= 1``) is the edge joining vertex ``i`` to its parent;
every other module uses this numbering.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numba import njit

from .errors import SizeCapError, StructureError
from .rng import as_generator, next_below

ENUMERATION_CAP = 8


@dataclass(frozen=True)
class VertexSet:
    """Sorted, duplicate-free, nonempty set of vertex ids."""

    members: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.members)
        if not m:
            raise StructureError("empty vertex set")
        if any(a >= b for a, b in zip(m, m[1:])):
            raise StructureError("vertex set must be sorted and duplicate-free")
        object.__setattr__(self, "members", m)

    @classmethod
    def of(cls, vertices: Iterable[int]) -> "VertexSet":
        return cls(tuple(sorted(set(int(v) for v in vertices))))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, v):
        return v in self.members


@dataclass(frozen=True, eq=False)
class IncreasingTree:
    """Rooted tree on {0..n} with ``parent[i] < i`` for every ``i >= 1``.

    ``parent[0]`` holds the sentinel -1.
    """

    parent: np.ndarray
    _children: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.ascontiguousarray(self.parent, dtype=np.int64)
        if p.ndim != 1 or p.size == 0:
            raise StructureError("parent array must be a nonempty 1-d array")
        p = p.copy()
        p[0] = -1
        idx = np.arange(p.size)
        if p.size > 1 and (np.any(p[1:] < 0) or np.any(p[1:] >= idx[1:])):
            raise StructureError("parent[i] must lie in {0, ..., i-1}")
        p.setflags(write=False)
        object.__setattr__(self, "parent", p)

    @property
    def n_edges(self) -> int:
        return self.parent.size - 1

    @property
    def n_vertices(self) -> int:
        return self.parent.size

    def key(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.parent[1:])

    def __eq__(self, other):
        if not isinstance(other, IncreasingTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.n_edges <= 12:
            return f"IncreasingTree(parent={list(self.key())})"
        return f"IncreasingTree(n_edges={self.n_edges})"

    def children(self) -> list[list[int]]:
        """Child lists, built on first use."""
        if self._children is None:
            ch: list[list[int]] = [[] for _ in range(self.parent.size)]
            for i in range(1, self.parent.size):
                ch[int(self.parent[i])].append(i)
            object.__setattr__(self, "_children", ch)
        return self._children

    def edges(self) -> list[tuple[int, int]]:
        return [(int(self.parent[i]), i) for i in range(1, self.parent.size)]

    @classmethod
    def from_parents(cls, parents: Iterable[int]) -> "IncreasingTree":
        """Build from ``parent[1..n]`` (the root's sentinel is implied)."""
        return cls(np.array([-1, *parents], dtype=np.int64))

    @classmethod
    def path(cls, n: int) -> "IncreasingTree":
        return cls(np.arange(-1, n, dtype=np.int64))

    @classmethod
    def star(cls, n: int) -> "IncreasingTree":
        p = np.zeros(n + 1, dtype=np.int64)
        return cls(p)


@njit(cache=True)
def fill_parents(parent, st):
    """Recursive construction: parent of i uniform on {0..i-1}."""
    parent[0] = -1
    for i in range(1, parent.size):
        parent[i] = next_below(st, i)


def sample_rrt(n: int, rng=None) -> IncreasingTree:
    """Uniform random recursive tree with ``n`` edges."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = as_generator(rng)
    i = np.arange(1, n + 1)
    parents = np.floor(rng.random(n) * i).astype(np.int64)
    return IncreasingTree(np.concatenate(([-1], parents)))


def enumerate_increasing_trees(n: int, cap: int = ENUMERATION_CAP) -> list[IncreasingTree]:
    """All n! increasing trees on {0..n}, lexicographic in the parent array."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise SizeCapError(f"enumeration limited to n <= {cap}, got {n}")
    return [IncreasingTree.from_parents(ps) for ps in itertools.product(*(range(i) for i in range(1, n + 1)))]


def canonical_relabel(vertices: VertexSet | Iterable[int], parent_of: Mapping[int, int]) -> IncreasingTree:
    """Order-preserving relabeling of a tree fragment onto {0..m}.

    ``parent_of`` maps each non-root member to its parent inside the
    fragment; the root is the smallest member.
    """
    vs = vertices if isinstance(vertices, VertexSet) else VertexSet.of(vertices)
    members = vs.members
    pos = {v: k for k, v in enumerate(members)}
    root = members[0]
    parents = []
    for v in members[1:]:
        if v not in parent_of:
            raise StructureError(f"vertex {v} has no parent in the fragment")
        p = parent_of[v]
        if p not in pos:
            raise StructureError(f"parent {p} of {v} lies outside the fragment")
        parents.append(pos[p])
    if root in parent_of and parent_of[root] in pos:
        raise StructureError("the smallest vertex must be the root")
    # connectivity and acyclicity: every chain must reach the root
    for k in range(1, len(members)):
        seen = 0
        j = k
        while j != 0:
            j = parents[j - 1]
            seen += 1
            if seen > len(members):
                raise StructureError("fragment contains a cycle")
    try:
        return IncreasingTree.from_parents(parents)
    except StructureError as exc:
        raise StructureError(f"fragment is not increasing: {exc}") from None


@njit(cache=True)
def _subtree_sizes(parent):
    size = np.ones(parent.size, dtype=np.int64)
    for i in range(parent.size - 1, 0, -1):
        size[parent[i]] += size[i]
    return size


@njit(cache=True)
def _depths(parent):
    d = np.zeros(parent.size, dtype=np.int64)
    for i in range(1, parent.size):
        d[i] = d[parent[i]] + 1
    return d


def _check_vertex(t: IncreasingTree, v: int) -> None:
    if not 0 <= v <= t.n_edges:
        raise IndexError(f"vertex {v} out of range 0..{t.n_edges}")


def subtree_sizes(t: IncreasingTree) -> np.ndarray:
    return _subtree_sizes(t.parent)


def subtree_size(t: IncreasingTree, k: int) -> int:
    """Number of vertices in the subtree stemming from ``k``, ``k`` included."""
    _check_vertex(t, k)
    size = 1
    # descendants of k all carry labels > k
    inside = np.zeros(t.n_vertices, dtype=bool)
    inside[k] = True
    p = t.parent
    for i in range(k + 1, t.n_vertices):
        if inside[p[i]]:
            inside[i] = True
            size += 1
    return size


def depths(t: IncreasingTree) -> np.ndarray:
    return _depths(t.parent)


def depth(t: IncreasingTree, v: int) -> int:
    _check_vertex(t, v)
    d = 0
    while v != 0:
        v = int(t.parent[v])
        d += 1
    return d


def root_degree(t: IncreasingTree) -> int:
    return int(np.count_nonzero(t.parent[1:] == 0))


def harmonic(n: int) -> float:
    return math.fsum(1.0 / i for i in range(1, n + 1))
