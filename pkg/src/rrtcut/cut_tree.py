"""Binary cut-trees recording how a destruction splits blocks of vertices.

Layout shared by every builder: internal node ``k`` (``0 <= k < n``) is the
block split by the removal at step ``k``; leaf ``n + v`` is the singleton
``{v}``.  The left child holds the part containing the block's root (its
smallest vertex for an increasing tree), the right child the part cut off.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np
from numba import njit

from . import _replay
from .core_tree import IncreasingTree, VertexSet
from .destruction import DestructionTrace
from .errors import SizeCapError, StructureError

BLOCK_CAP = 10_000


@dataclass(frozen=True, eq=False)
class CutTree:
    """Immutable array form of a cut-tree.

    ``labels``, when set, names the vertices of a tree that was relabeled
    before cutting (see :func:`build_cut_tree_from_edges`).
    """

    n: int
    left: np.ndarray
    right: np.ndarray
    up: np.ndarray
    block_size: np.ndarray
    labels: tuple[Hashable, ...] | None = None
    _depth: np.ndarray = field(default=None, init=False, repr=False)
    _height: np.ndarray = field(default=None, init=False, repr=False)

    @property
    def root(self) -> int:
        return 0

    @property
    def n_nodes(self) -> int:
        return self.left.size

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def leaf_of(self, v: int) -> int:
        if not 0 <= v <= self.n:
            raise IndexError(f"vertex {v} out of range 0..{self.n}")
        return self.n + v

    def children(self, node: int) -> tuple[int, int] | None:
        if self.is_leaf(node):
            return None
        return int(self.left[node]), int(self.right[node])

    def depths(self) -> np.ndarray:
        if self._depth is None:
            object.__setattr__(self, "_depth", _replay.node_depths(self.left, self.right, self.root))
        return self._depth

    def heights(self) -> np.ndarray:
        """Height of the subtree below each node (0 at leaves)."""
        if self._height is None:
            object.__setattr__(self, "_height", _subtree_heights(self.left, self.right, self.n))
        return self._height

    def leaf_depth(self, v: int) -> int:
        return int(self.depths()[self.leaf_of(v)])

    def leaf_depths(self) -> np.ndarray:
        return self.depths()[self.n :]

    def block(self, node: int) -> VertexSet:
        """Vertices below ``node``, recovered by a traversal."""
        out = []
        stack = [node]
        while stack:
            x = stack.pop()
            if self.left[x] < 0:
                out.append(x - self.n)
            else:
                stack.append(int(self.left[x]))
                stack.append(int(self.right[x]))
        return VertexSet.of(out)

    def blocks(self) -> list[VertexSet]:
        """All blocks, indexed by node; only for n up to the block cap."""
        if self.n > BLOCK_CAP:
            raise SizeCapError(f"blocks are materialized only for n <= {BLOCK_CAP}")
        return [self.block(x) for x in range(self.n_nodes)]

    def labeled_block(self, node: int) -> frozenset:
        members = self.block(node)
        if self.labels is None:
            return frozenset(members)
        return frozenset(self.labels[v] for v in members)

    def shape_code(self) -> int:
        return int(_replay.shape_code(self.left, self.right, self.root))

    def check(self) -> None:
        """Assert the structural invariants; raises StructureError."""
        n = self.n
        internal = np.arange(n)
        if n and np.any(self.left[:n] < 0):
            raise StructureError("internal node without children")
        if np.any(self.left[n:] >= 0):
            raise StructureError("leaf with children")
        if n and not np.array_equal(
            self.block_size[internal], self.block_size[self.left[:n]] + self.block_size[self.right[:n]]
        ):
            raise StructureError("block sizes do not add up")
        if self.block_size[self.root] != n + 1:
            raise StructureError("root block must hold every vertex")


@njit(cache=True)
def _subtree_heights(left, right, n):
    h = np.zeros(left.size, dtype=np.int64)
    # children of internal node k are leaves or internal nodes created later
    for k in range(n - 1, -1, -1):
        h[k] = 1 + max(h[left[k]], h[right[k]])
    return h


def _from_order(parent: np.ndarray, order: np.ndarray, labels=None) -> CutTree:
    n1 = parent.size
    comp_root, comp_size, _, _, _ = _replay.reverse_replay(parent, order, np.zeros(n1, dtype=np.bool_))
    left, right, up, size = _replay.cut_tree_arrays(parent, order, comp_root, comp_size)
    return CutTree(n1 - 1, left, right, up, size, labels)


def build_cut_tree(trace: DestructionTrace) -> CutTree:
    return _from_order(trace.parent, trace.order)


def build_cut_tree_from_edges(
    root: Hashable, edges: Sequence[tuple[Hashable, Hashable]]
) -> CutTree:
    """Cut-tree of an arbitrary labeled tree whose edges are listed in removal order.

    Vertices are renumbered breadth first from ``root`` so that the tree is
    increasing; ``labels`` maps the numbers back.
    """
    adj: dict[Hashable, list] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if root not in adj and edges:
        raise StructureError("root is not a vertex of the tree")
    number = {root: 0}
    labels = [root]
    par = [-1]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, []):
            if y not in number:
                number[y] = len(labels)
                labels.append(y)
                par.append(number[x])
                queue.append(y)
    if len(labels) != len(edges) + 1 or len(labels) != max(len(adj), 1):
        raise StructureError("edges do not form a tree")
    order = []
    for a, b in edges:
        ia, ib = number[a], number[b]
        order.append(max(ia, ib) if par[max(ia, ib)] == min(ia, ib) else -1)
    if -1 in order:
        raise StructureError("edges do not form a tree")
    parent = np.array(par, dtype=np.int64)
    return _from_order(parent, np.array(order, dtype=np.int64), tuple(labels))


def reduced_length(ct: CutTree, targets: VertexSet | Iterable[int]) -> int:
    """Edges of the subtree spanned by the root and the target leaves."""
    targets = list(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    seen = np.zeros(ct.n_nodes, dtype=np.bool_)
    seen[ct.root] = True
    edges = 0
    for v in targets:
        x = ct.leaf_of(int(v))
        # climb until the chain meets nodes already spanned
        while not seen[x]:
            seen[x] = True
            edges += 1
            x = int(ct.up[x])
    return edges


@dataclass(frozen=True)
class TrunkDecomposition:
    trunk: tuple[int, ...]
    branch_depths: tuple[int, ...]

    @property
    def trunk_length(self) -> int:
        """Edges on the trunk."""
        return len(self.trunk) - 1

    @property
    def max_branch_depth(self) -> int:
        return max(self.branch_depths, default=0)


def trunk_decomposition(ct: CutTree) -> TrunkDecomposition:
    """Root-to-{0} path and the heights of the subtrees hanging off it."""
    trunk = [ct.root]
    branches = []
    heights = ct.heights()
    x = ct.root
    while not ct.is_leaf(x):
        branches.append(int(heights[ct.right[x]]))
        x = int(ct.left[x])
        trunk.append(x)
    return TrunkDecomposition(tuple(trunk), tuple(branches))


def bst_height_saturation(ct: CutTree) -> tuple[int, int]:
    """(largest, smallest) leaf level."""
    d = ct.leaf_depths()
    return int(d.max()), int(d.min())


@njit(cache=True)
def _ordered_arrays(parent):
    n1 = parent.size
    n = n1 - 1
    left = np.full(n + n1, -1, dtype=np.int64)
    right = np.full(n + n1, -1, dtype=np.int64)
    up = np.full(n + n1, -1, dtype=np.int64)
    size = np.ones(n + n1, dtype=np.int64)
    # slot_node[v]/slot_side[v]: where the leaf {v} currently hangs
    slot_node = np.full(n1, -1, dtype=np.int64)
    slot_side = np.zeros(n1, dtype=np.int64)
    for i in range(1, n1):
        p = parent[i]
        k = i - 1
        pn = slot_node[p]
        if pn >= 0:
            up[k] = pn
            if slot_side[p] == 0:
                left[pn] = k
            else:
                right[pn] = k
        slot_node[p] = k
        slot_side[p] = 0
        slot_node[i] = k
        slot_side[i] = 1
    for v in range(n1):
        leaf = n + v
        pn = slot_node[v]
        if pn >= 0:
            up[leaf] = pn
            if slot_side[v] == 0:
                left[pn] = leaf
            else:
                right[pn] = leaf
    # block sizes from the leaves up; children of k carry larger indices
    for k in range(n - 1, -1, -1):
        size[k] = size[left[k]] + size[right[k]]
    return left, right, up, size


def build_ordered_cut_tree(t: IncreasingTree) -> CutTree:
    """Cut-tree of the natural order, grown one vertex at a time.

    Adding vertex i replaces the leaf {parent(i)} by an internal node with
    leaves {parent(i)} and {i}.
    """
    left, right, up, size = _ordered_arrays(t.parent)
    return CutTree(t.n_edges, left, right, up, size)
