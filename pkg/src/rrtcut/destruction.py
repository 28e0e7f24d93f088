"""Destruction of an increasing tree by uniform random edge removal.

Every staged algorithm (isolating the root, the first vertices, a set of
targets, disconnecting targets) is evaluated on one global uniform removal
order, filtered to the edges the algorithm would see.  By exchangeability
the next surviving edge of the global order is uniform among the edges the
algorithm may pick, so the laws agree.  The ``*_direct`` simulators pick
uniformly among retained edges at every step instead; they are slow and
exist to test that equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import _replay
from .core_tree import IncreasingTree, VertexSet, root_degree
from .errors import StructureError
from .rng import TAG_PICK, as_generator, new_state, next_below, next_uniform


@dataclass(frozen=True, eq=False)
class DestructionTrace:
    """A tree together with the order in which its edges are removed.

    ``order[k]`` is the edge id (child endpoint) removed at step k.
    ``removal_times[j]``, when present, is the uniform mark of edge ``j+1``.
    """

    tree: IncreasingTree
    order: np.ndarray
    removal_times: np.ndarray | None = None
    _ranks: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = self.tree.n_edges
        order = np.ascontiguousarray(self.order, dtype=np.int64)
        if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(1, n + 1)):
            raise StructureError("order must be a permutation of the edge ids 1..n")
        object.__setattr__(self, "order", order)
        if self.removal_times is not None:
            times = np.ascontiguousarray(self.removal_times, dtype=np.float64)
            if times.shape != (n,):
                raise StructureError("need one removal time per edge")
            if not np.array_equal(order, order_from_times(times)):
                raise StructureError("removal_times do not sort into order")
            object.__setattr__(self, "removal_times", times)

    @property
    def n(self) -> int:
        return self.tree.n_edges

    @property
    def parent(self) -> np.ndarray:
        return self.tree.parent

    def ranks(self) -> np.ndarray:
        """``ranks[e]`` is the step at which edge e is removed (``ranks[0] = -1``)."""
        if self._ranks is None:
            r = np.full(self.n + 1, -1, dtype=np.int64)
            r[self.order] = np.arange(self.n)
            object.__setattr__(self, "_ranks", r)
        return self._ranks

    def keys(self) -> np.ndarray:
        k = self.ranks().astype(np.float64)
        k[0] = np.inf
        return k

    @classmethod
    def natural(cls, tree: IncreasingTree) -> "DestructionTrace":
        """Ordered destruction: edge i is removed at step i."""
        return cls(tree, np.arange(1, tree.n_edges + 1))

    @classmethod
    def from_times(cls, tree: IncreasingTree, times: Sequence[float]) -> "DestructionTrace":
        times = np.asarray(times, dtype=np.float64)
        return cls(tree, order_from_times(times), times)


def order_from_times(times: np.ndarray) -> np.ndarray:
    # stable sort: equal times fall back to the smaller edge id
    return np.argsort(times, kind="stable").astype(np.int64) + 1


@dataclass(frozen=True)
class IsolationResult:
    cuts: int
    severed_sizes: tuple[int, ...]

    def __post_init__(self):
        assert self.cuts == len(self.severed_sizes)


@dataclass(frozen=True)
class MultiIsolationResult:
    """Staged isolation of 0, 1, ..., ell-1.

    ``per_stage_cuts[i]`` counts the cuts spent isolating vertex i, so its
    partial sums are X'_{n,1} <= ... <= X'_{n,ell}.  ``stage_sizes[i]`` is
    the size of the component of i right after the edge from i to its parent
    goes (n+1 for the root stage).
    """

    per_stage_cuts: tuple[int, ...]
    stage_sizes: tuple[int, ...]

    @property
    def total_cuts(self) -> int:
        return sum(self.per_stage_cuts)

    @property
    def partial_sums(self) -> tuple[int, ...]:
        return tuple(np.cumsum(self.per_stage_cuts).tolist())

    @property
    def increments(self) -> tuple[int, ...]:
        return self.per_stage_cuts[1:]


@dataclass(frozen=True)
class DisconnectionResult:
    """``counts[k-2]`` is the step at which the targets first occupy k components."""

    counts: tuple[int, ...]


def sample_destruction(t: IncreasingTree, rng=None) -> DestructionTrace:
    """Uniform removal order from i.i.d. uniform marks on the edges."""
    if t.n_edges < 1:
        raise StructureError("a tree without edges cannot be destroyed")
    rng = as_generator(rng)
    return DestructionTrace.from_times(t, rng.random(t.n_edges))


def isolate_root(trace: DestructionTrace) -> IsolationResult:
    cuts, sizes = _replay.replay_root_isolation(trace.parent, trace.order)
    return IsolationResult(int(cuts), tuple(int(s) for s in sizes))


def isolate_root_fast(trace: DestructionTrace) -> int:
    """X_n in one root-to-leaf sweep over the removal times."""
    if trace.removal_times is None:
        raise StructureError("isolate_root_fast needs removal_times")
    key = np.concatenate(([np.inf], trace.removal_times))
    return int(_replay.root_path_count(trace.parent, key))


def _targets_mask(n: int, targets: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n + 1, dtype=np.bool_)
    for v in targets:
        if not 0 <= v <= n:
            raise IndexError(f"target {v} out of range 0..{n}")
        mask[v] = True
    return mask


def _run_replay(trace: DestructionTrace, targets: Iterable[int] = ()):
    mask = _targets_mask(trace.n, targets)
    return _replay.reverse_replay(trace.parent, trace.order, mask)


def isolate_first_ell(trace: DestructionTrace, ell: int) -> MultiIsolationResult:
    n = trace.n
    if not 1 <= ell <= n + 1:
        raise ValueError(f"ell must lie in 1..{n + 1}")
    comp_root, _, detached, _, _ = _run_replay(trace)
    # a component holds some of 0..ell-1 iff its smallest vertex is < ell,
    # and that smallest vertex is the stage it is cut in
    stage = comp_root[comp_root < ell]
    per_stage = np.bincount(stage, minlength=ell)[:ell]
    ranks = trace.ranks()
    sizes = [n + 1] + [int(detached[ranks[i]]) for i in range(1, ell)]
    return MultiIsolationResult(tuple(int(c) for c in per_stage), tuple(sizes))


def isolate_targets(trace: DestructionTrace, targets: VertexSet | Iterable[int]) -> int:
    """Cuts falling in components that still hold at least one target."""
    targets = list(targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    _, _, _, tgt_total, _ = _run_replay(trace, targets)
    return int(np.count_nonzero(tgt_total >= 1))


def isolate_targets_fast(trace: DestructionTrace, targets: Iterable[int]) -> int:
    """Path-minimum version of :func:`isolate_targets` (one sweep per target)."""
    targets = sorted(set(int(v) for v in targets))
    if not targets:
        raise ValueError("targets must be nonempty")
    n1 = trace.n + 1
    key = trace.keys()
    hit = np.zeros(n1, dtype=np.bool_)
    on_path = np.zeros(n1, dtype=np.bool_)
    buf = np.empty(2 * n1)
    flags = np.empty(n1, dtype=np.bool_)
    for v in targets:
        _replay.target_sweep(trace.parent, key, v, on_path, buf, flags)
        hit |= flags
    return int(np.count_nonzero(hit))


def disconnect_targets(trace: DestructionTrace, targets: VertexSet | Sequence[int]) -> DisconnectionResult:
    """Steps A_{n,2} <= ... <= A_{n,ell} of the disconnection algorithm.

    Only cuts in components holding two or more targets are counted.
    """
    targets = sorted(set(int(v) for v in targets))
    if len(targets) < 2:
        raise ValueError("need at least two distinct targets")
    _, _, _, tgt_total, tgt_det = _run_replay(trace, targets)
    counted = tgt_total >= 2
    splits = counted & (tgt_det >= 1) & (tgt_total - tgt_det >= 1)
    step = np.cumsum(counted)
    return DisconnectionResult(tuple(int(s) for s in step[splits]))


def leaf_depths(trace: DestructionTrace) -> np.ndarray:
    """Cuts needed to isolate each vertex (its leaf depth in the cut-tree)."""
    n1 = trace.n + 1
    key = trace.keys()
    out = np.empty(n1, dtype=np.int64)
    on_path = np.zeros(n1, dtype=np.bool_)
    buf = np.empty(2 * n1)
    flags = np.empty(n1, dtype=np.bool_)
    for v in range(n1):
        _replay.target_sweep(trace.parent, key, v, on_path, buf, flags)
        out[v] = np.count_nonzero(flags)
    return out


# ---------------------------------------------------------------------------
# direct simulators: uniform choice among retained edges at every step


class _Forest:
    """Mutable forest over a subset of an increasing tree's edges."""

    def __init__(self, t: IncreasingTree):
        self.parent = [int(x) for x in t.parent]
        self.alive = set(range(1, t.n_vertices))
        self.children = [list(c) for c in t.children()]

    def component(self, v: int) -> set[int]:
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            nbrs = [c for c in self.children[x] if c in self.alive]
            if x != 0 and x in self.alive:
                nbrs.append(self.parent[x])
            for y in nbrs:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        return comp

    def edges_in(self, comp: set[int]) -> list[int]:
        return sorted(e for e in comp if e != 0 and e in self.alive and self.parent[e] in comp)

    def cut(self, e: int) -> tuple[set[int], set[int]]:
        """Remove edge e; return (parent side, child side)."""
        self.alive.discard(e)
        return self.component(self.parent[e]), self.component(e)


def isolate_first_ell_direct(t: IncreasingTree, ell: int, rng=None) -> MultiIsolationResult:
    """Staged isolation of 0..ell-1 run literally, component by component."""
    n = t.n_edges
    if not 1 <= ell <= n + 1:
        raise ValueError(f"ell must lie in 1..{n + 1}")
    rng = as_generator(rng)
    forest = _Forest(t)
    aside: list[set[int]] = [set(range(n + 1))]
    per_stage = []
    sizes = {0: n + 1}
    for s in range(ell):
        comp = next(c for c in aside if s in c)
        aside.remove(comp)
        cuts = 0
        while len(comp) > 1:
            edges = forest.edges_in(comp)
            e = edges[int(rng.integers(len(edges)))]
            near, far = forest.cut(e)
            if s in far:
                near, far = far, near
            if any(s < j < ell for j in far):
                aside.append(far)
            # a vertex j leaves the set {0..j-1} exactly when its own edge goes
            if e < ell:
                sizes[e] = len(forest.component(e))
            comp = near
            cuts += 1
        per_stage.append(cuts)
    return MultiIsolationResult(tuple(per_stage), tuple(sizes[i] for i in range(ell)))


def isolate_targets_direct(t: IncreasingTree, targets: Iterable[int], rng=None) -> int:
    targets = set(int(v) for v in targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    rng = as_generator(rng)
    forest = _Forest(t)
    kept = [set(range(t.n_vertices))]
    cuts = 0
    while True:
        edges = [e for c in kept for e in forest.edges_in(c)]
        if not edges:
            return cuts
        e = edges[int(rng.integers(len(edges)))]
        comp = next(c for c in kept if e in c)
        kept.remove(comp)
        for part in forest.cut(e):
            if part & targets:
                kept.append(part)
        cuts += 1


def disconnect_targets_direct(t: IncreasingTree, targets: Sequence[int], rng=None) -> DisconnectionResult:
    targets = set(int(v) for v in targets)
    if len(targets) < 2:
        raise ValueError("need at least two distinct targets")
    rng = as_generator(rng)
    forest = _Forest(t)
    kept = [set(range(t.n_vertices))]
    n_comps = 1
    cuts = 0
    counts = []
    while kept:
        edges = [e for c in kept for e in forest.edges_in(c)]
        e = edges[int(rng.integers(len(edges)))]
        comp = next(c for c in kept if e in c)
        kept.remove(comp)
        a, b = forest.cut(e)
        cuts += 1
        if a & targets and b & targets:
            n_comps += 1
            counts.append(cuts)
        for part in (a, b):
            if len(part & targets) >= 2:
                kept.append(part)
    return DisconnectionResult(tuple(counts))


# ---------------------------------------------------------------------------
# vertex removal, ordered destruction, Goldschmidt-Martin coalescent


@njit(cache=True, nogil=True)
def vertex_removal_steps(parent, st):
    """Vertex-removal steps until the root is picked, drawing from state ``st``."""
    n1 = parent.size
    start, child = _replay.children_csr(parent)
    pool = np.arange(n1)
    pos = np.arange(n1)
    alive = np.ones(n1, dtype=np.bool_)
    size = n1
    stack = np.empty(n1, dtype=np.int64)
    steps = 0
    while True:
        v = pool[next_below(st, size)]
        steps += 1
        if v == 0:
            return steps
        top = 0
        stack[0] = v
        alive[v] = False
        while top >= 0:
            x = stack[top]
            top -= 1
            # swap-remove x from the pool
            j = pos[x]
            last = pool[size - 1]
            pool[j] = last
            pos[last] = j
            size -= 1
            for q in range(start[x], start[x + 1]):
                w = child[q]
                if alive[w]:
                    alive[w] = False
                    top += 1
                    stack[top] = w


def isolate_root_by_vertex_removal(t: IncreasingTree, rng=None) -> int:
    """Steps until the root is picked when uniform vertices of the root
    component are destroyed together with their descendants."""
    rng = as_generator(rng)
    return int(vertex_removal_steps(t.parent, new_state(int(rng.integers(2**63)), 0, TAG_PICK)))


def ordered_root_isolation_count(t: IncreasingTree) -> int:
    """Root isolation cuts when edge i is removed at step i."""
    if t.n_edges == 0:
        return 0
    return isolate_root(DestructionTrace.natural(t)).cuts


@dataclass(frozen=True)
class CoalescentResult:
    times: tuple[float, ...]
    blocks: tuple[int, ...]
    collisions: int
    partition: tuple[frozenset[int], ...] | None = None


LABEL_SET_CAP = 10_000


def gm_coalescent(t: IncreasingTree, rng=None) -> CoalescentResult:
    """Random cutting with exponential clocks, read as a coalescent.

    ``t`` has vertices 0..m-1 standing for labels 1..m, root label 1.  When a
    live edge rings it is deleted together with the subtree below it, whose
    labels merge into the proximal endpoint's block.  ``blocks`` starts at m
    and ``times`` at 0.
    """
    m = t.n_vertices
    if m < 2:
        raise ValueError("need at least two vertices")
    rng = as_generator(rng)
    clocks = rng.exponential(size=m - 1)
    order = np.argsort(clocks, kind="stable") + 1
    children = t.children()
    in_root = np.ones(m, dtype=bool)
    labels = [{v + 1} for v in range(m)] if m <= LABEL_SET_CAP else None
    n_blocks = m
    times, blocks = [0.0], [m]
    collisions = 0
    for e in order:
        e = int(e)
        if not in_root[e]:
            continue
        p = int(t.parent[e])
        stack = [e]
        in_root[e] = False
        removed = 0
        while stack:
            x = stack.pop()
            removed += 1
            if labels is not None:
                labels[p] |= labels[x]
                labels[x] = None
            for w in children[x]:
                if in_root[w]:
                    in_root[w] = False
                    stack.append(w)
        n_blocks -= removed
        collisions += 1
        times.append(float(clocks[e - 1]))
        blocks.append(n_blocks)
    partition = None
    if labels is not None:
        partition = tuple(frozenset(b) for b in labels if b is not None)
    return CoalescentResult(tuple(times), tuple(blocks), collisions, partition)


def root_degree_check(t: IncreasingTree) -> bool:
    return ordered_root_isolation_count(t) == root_degree(t)
