"""Tree of component sizes produced by a destruction.

Every removal splits a component in two; the size of the part not holding
the component's root becomes a new child of the node representing that
component.  Node 0 is the whole tree (size n+1) and node ``k+1`` is the
part cut off at step ``k``, so children appear in creation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from . import _replay
from .destruction import DestructionTrace
from .errors import StructureError
from .rng import as_generator


@dataclass(frozen=True)
class UniversalIndex:
    """Finite word over the positive integers; the empty word is the root."""

    path: tuple[int, ...] = ()

    def __post_init__(self):
        p = tuple(int(j) for j in self.path)
        if any(j < 1 for j in p):
            raise ValueError("universal indices use positive integers")
        object.__setattr__(self, "path", p)

    @property
    def generation(self) -> int:
        return len(self.path)

    def child(self, j: int) -> "UniversalIndex":
        return UniversalIndex(self.path + (j,))

    def parent(self) -> "UniversalIndex":
        if not self.path:
            raise ValueError("the root has no parent")
        return UniversalIndex(self.path[:-1])


def _csr(node_parent: np.ndarray, order: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Child lists of nodes 0..m-1 listed in ``order`` (a permutation of 1..m-1)."""
    m = node_parent.size
    counts = np.bincount(node_parent[1:], minlength=m)
    start = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=start[1:])
    return start, order


@dataclass(frozen=True, eq=False)
class ComponentSizeTree:
    """Sizes and creation-ordered parent links of the component nodes.

    ``node_parent[0] = -1``; ``sizes[0] = n + 1``.
    """

    n: int
    sizes: np.ndarray
    node_parent: np.ndarray
    _csr: tuple = field(default=None, init=False, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.sizes.size

    def _children_csr(self):
        if self._csr is None:
            # stable sort keeps creation order within each parent
            order = np.argsort(self.node_parent[1:], kind="stable") + 1
            object.__setattr__(self, "_csr", _csr(self.node_parent, order))
        return self._csr

    def children(self, node: int) -> np.ndarray:
        start, order = self._children_csr()
        return order[start[node] : start[node + 1]]

    def child_sizes(self, node: int) -> list[int]:
        return self.sizes[self.children(node)].tolist()

    def generation_one_sizes(self) -> list[int]:
        return self.child_sizes(0)

    def generations(self) -> np.ndarray:
        g = np.zeros(self.n_nodes, dtype=np.int64)
        for k in range(1, self.n_nodes):
            g[k] = g[self.node_parent[k]] + 1
        return g

    def check(self) -> None:
        totals = np.ones(self.n_nodes, dtype=np.int64)
        np.add.at(totals, self.node_parent[1:], self.sizes[1:])
        if not np.array_equal(totals, self.sizes):
            raise StructureError("a node's size differs from 1 + sum of its children")


@njit(cache=True)
def _build_nodes(order, comp_root, detached, n1):
    m = order.size
    node_parent = np.empty(m + 1, dtype=np.int64)
    sizes = np.empty(m + 1, dtype=np.int64)
    node_parent[0] = -1
    sizes[0] = n1
    # node_of_root[v]: node of the live component whose root is v
    node_of_root = np.zeros(n1, dtype=np.int64)
    for k in range(m):
        node_parent[k + 1] = node_of_root[comp_root[k]]
        sizes[k + 1] = detached[k]
        node_of_root[order[k]] = k + 1
    return node_parent, sizes


def build_component_tree(trace: DestructionTrace) -> ComponentSizeTree:
    n1 = trace.n + 1
    comp_root, _, detached, _, _ = _replay.reverse_replay(trace.parent, trace.order, np.zeros(n1, dtype=np.bool_))
    node_parent, sizes = _build_nodes(trace.order, comp_root, detached, n1)
    return ComponentSizeTree(trace.n, sizes, node_parent)


def plane_code(ct: ComponentSizeTree) -> int:
    """Shape code with children in creation order (see oracle.plane_code)."""
    from .oracle import plane_code as code

    return code((ct.node_parent[1:] - 1).tolist())


@dataclass(frozen=True, eq=False)
class RankedNormalizedTree:
    """Ranked view of a component tree.

    Children of each node are listed by decreasing size, ties in uniform
    random order; ``z[u] = (ln n)^{|u|} * size_u / n``.
    """

    base: ComponentSizeTree
    ranked_start: np.ndarray
    ranked_children: np.ndarray
    z: np.ndarray
    generation: np.ndarray

    def children(self, node: int) -> np.ndarray:
        return self.ranked_children[self.ranked_start[node] : self.ranked_start[node + 1]]

    def node_at(self, u: UniversalIndex) -> int | None:
        """Node addressed by a universal index, or None for an absent (size 0) node."""
        x = 0
        for j in u.path:
            kids = self.children(x)
            if j > kids.size:
                return None
            x = int(kids[j - 1])
        return x

    def value(self, u: UniversalIndex) -> float:
        x = self.node_at(u)
        return 0.0 if x is None else float(self.z[x])


def rank_and_normalize(ct: ComponentSizeTree, rng=None) -> RankedNormalizedTree:
    if ct.n < 2:
        raise ValueError("normalization needs n >= 2")
    rng = as_generator(rng)
    m = ct.n_nodes
    ties = rng.random(m - 1)
    kids = np.arange(1, m)
    # group by parent, then decreasing size, then random tie-break
    order = kids[np.lexsort((ties, -ct.sizes[1:], ct.node_parent[1:]))]
    start, ranked = _csr(ct.node_parent, order)
    gen = ct.generations()
    ln = math.log(ct.n)
    z = ct.sizes * np.power(ln, gen.astype(np.float64)) / ct.n
    return RankedNormalizedTree(ct, start, ranked, z, gen)


def rank_sizes(sizes: Sequence[int], rng=None) -> list[int]:
    """Decreasing arrangement of one sibling list with random tie order."""
    rng = as_generator(rng)
    sizes = np.asarray(sizes)
    idx = np.lexsort((rng.random(sizes.size), -sizes))
    return sizes[idx].tolist()


def generation_slice(
    rt: RankedNormalizedTree, k: int, top_j: int, parent: UniversalIndex | None = None
) -> list[float]:
    """Largest normalized values in generation ``k``.

    With ``parent`` (an index of generation k-1) only that node's children
    are considered, in ranked order; otherwise all of generation k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if top_j <= 0:
        return []
    if parent is not None:
        if parent.generation != k - 1:
            raise ValueError("parent index must lie in generation k-1")
        x = rt.node_at(parent)
        if x is None:
            return []
        return rt.z[rt.children(x)[:top_j]].tolist()
    vals = rt.z[rt.generation == k]
    return np.sort(vals)[::-1][:top_j].tolist()
