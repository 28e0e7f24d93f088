"""Bernoulli bond percolation on random recursive trees, together with the
Yule-process and urn descriptions of the root cluster."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .core_tree import IncreasingTree, enumerate_increasing_trees
from .errors import SizeCapError
from .oracle import ExactDistribution
from .rng import as_generator
from .stats import beta_cdf, ks_statistic


def _check_p(p) -> None:
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")


@njit(cache=True)
def cluster_labels(parent, kept):
    """Smallest vertex of each vertex's cluster; ``kept[i-1]`` refers to edge i.

    Parents precede children, so one forward pass suffices.
    """
    n1 = parent.size
    lab = np.empty(n1, dtype=np.int64)
    lab[0] = 0
    for i in range(1, n1):
        lab[i] = lab[parent[i]] if kept[i - 1] else i
    return lab


@dataclass(frozen=True, eq=False)
class PercolationOutcome:
    p: float
    kept: np.ndarray
    root_cluster_size: int
    ranked_nonroot_sizes: np.ndarray

    @property
    def n_clusters(self) -> int:
        return 1 + self.ranked_nonroot_sizes.size


def percolate(t: IncreasingTree, p: float, rng=None) -> PercolationOutcome:
    """Keep each edge independently with probability p."""
    _check_p(p)
    rng = as_generator(rng)
    kept = rng.random(t.n_edges) < p
    return outcome_from_kept(t, kept, p)


def outcome_from_kept(t: IncreasingTree, kept: np.ndarray, p: float = float("nan")) -> PercolationOutcome:
    kept = np.asarray(kept, dtype=np.bool_)
    lab = cluster_labels(t.parent, kept)
    sizes = np.bincount(lab, minlength=t.n_vertices)
    others = np.sort(sizes[1:][sizes[1:] > 0])[::-1]
    return PercolationOutcome(p, kept, int(sizes[0]), others)


def supercritical_p(n: int, t: float) -> float:
    if n < 3:
        raise ValueError("need n >= 3")
    if t <= 0:
        raise ValueError("t must be positive")
    p = 1.0 - t / math.log(n)
    if not 0 < p < 1:
        raise ValueError(f"p = 1 - t/ln n = {p} falls outside (0, 1)")
    return p


def schweinsberg_statistic(c0_over_n, n: int, t: float):
    """(C_0/n - e^{-t}) ln n - t e^{-t} ln ln n."""
    ln = math.log(n)
    e = math.exp(-t)
    return (np.asarray(c0_over_n) - e) * ln - t * e * math.log(ln)


@dataclass(frozen=True, eq=False)
class SupercriticalSummary:
    """Per-trial results at p = 1 - t/ln n.

    ``ranked[:, j]`` holds (ln n / n) C_{j+1,n}, zero-padded.
    """

    n: int
    t: float
    p: float
    root_fraction: np.ndarray
    ranked: np.ndarray
    schweinsberg: np.ndarray

    def mean_root_fraction(self) -> float:
        return float(self.root_fraction.mean())

    def second_moment(self) -> float:
        return float(np.mean(self.root_fraction**2))

    def count_at_least(self, x: float) -> float:
        """Mean number of normalized non-root clusters >= x (within the kept top list)."""
        return float(np.mean(np.count_nonzero(self.ranked >= x, axis=1)))


def supercritical_run(n: int, t: float, trials: int, rng=None, top: int = 32, threads: int | None = None):
    from .batch import percolation_batch

    p = supercritical_p(n, t)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = as_generator(rng)
    seed = int(rng.integers(2**63))
    root, ranked = percolation_batch(n, p, seed, trials, top, threads)
    frac = root / n
    return SupercriticalSummary(n, t, p, frac, ranked * math.log(n) / n, schweinsberg_statistic(frac, n, t))


# ---------------------------------------------------------------------------
# Yule process with neutral mutations


@dataclass(frozen=True, eq=False)
class YuleTrace:
    """Yule process run until the population reaches n+1.

    Entry k of ``times``/``population``/``root_type`` describes the state
    right after the k-th birth (entry 0 is the ancestor alone at time 0).
    ``parent`` is the genealogy and ``clone[i-1]`` says whether individual
    i inherited its parent's type.
    """

    times: np.ndarray
    population: np.ndarray
    root_type: np.ndarray
    parent: np.ndarray
    clone: np.ndarray

    @property
    def rho(self) -> float:
        """Time at which the population first equals n+1."""
        return float(self.times[-1])

    @property
    def final_root_type(self) -> int:
        return int(self.root_type[-1])

    def population_at(self, s: float) -> int:
        if s > self.rho:
            raise ValueError("trace stops before time s")
        return int(self.population[np.searchsorted(self.times, s, side="right") - 1])

    def genealogy(self) -> IncreasingTree:
        return IncreasingTree(self.parent)


def yule_with_mutations(n: int, p: float, rng=None) -> YuleTrace:
    """Each individual gives birth at rate 1; a child is a clone with probability p."""
    if n < 0:
        raise ValueError("need n >= 0")
    _check_p(p)
    rng = as_generator(rng)
    sizes = np.arange(1, n + 1)
    waits = rng.exponential(1.0 / sizes)
    times = np.concatenate(([0.0], np.cumsum(waits)))
    # the parent of a newborn is uniform among the current population
    parents = np.floor(rng.random(n) * sizes).astype(np.int64)
    clone = rng.random(n) < p
    parent = np.concatenate(([-1], parents))
    is_root_type = np.ones(n + 1, dtype=bool)
    for i in range(1, n + 1):
        is_root_type[i] = clone[i - 1] and is_root_type[parents[i - 1]]
    return YuleTrace(times, np.arange(1, n + 2), np.cumsum(is_root_type), parent, clone)


# ---------------------------------------------------------------------------
# urns


@dataclass(frozen=True)
class UrnState:
    red: int
    black: int
    p: float

    @property
    def total(self) -> int:
        return self.red + self.black


def polya_hoppe_urn(n_draws: int, p: float, rng=None, red: int = 1, black: int = 0) -> UrnState:
    """Draw a ball; a red draw adds red with probability p (black otherwise),
    a black draw adds black."""
    _check_p(p)
    if red < 1 or black < 0 or n_draws < 0:
        raise ValueError("invalid urn parameters")
    rng = as_generator(rng)
    u = rng.random(n_draws)
    v = rng.random(n_draws)
    for k in range(n_draws):
        if u[k] * (red + black) < red and v[k] < p:
            red += 1
        else:
            black += 1
    return UrnState(red, black, p)


@dataclass(frozen=True, eq=False)
class SubtreeLimitSummary:
    n: int
    k: int
    fractions: np.ndarray
    ks: float


def polya_subtree_limit(n: int, k: int, trials: int, rng=None, threads: int | None = None) -> SubtreeLimitSummary:
    """Empirical law of |T_n^k| / n over fresh trees, with its KS distance to Beta(1, k)."""
    from .batch import subtree_size_batch

    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= n")
    rng = as_generator(rng)
    sizes = subtree_size_batch(n, k, int(rng.integers(2**63)), trials, threads)
    frac = sizes / n
    return SubtreeLimitSummary(n, k, frac, ks_statistic(frac, lambda x: beta_cdf(x, 1, k)))


# ---------------------------------------------------------------------------
# exact laws at small n


def _frac(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p).limit_denominator(10**12)


def exact_urn_law(n_draws: int, p) -> ExactDistribution:
    """Red-ball law of the Polya-Hoppe urn started from one red ball."""
    p = _frac(p)
    law = {1: Fraction(1)}
    for m in range(n_draws):
        total = m + 1
        nxt: dict[int, Fraction] = {}
        for r, w in law.items():
            up = Fraction(r, total) * p
            nxt[r + 1] = nxt.get(r + 1, Fraction(0)) + w * up
            nxt[r] = nxt.get(r, Fraction(0)) + w * (1 - up)
        law = nxt
    return ExactDistribution.from_weights(law)


def exact_root_cluster_law(n: int, p, cap: int = 6) -> ExactDistribution:
    """Root cluster law by enumerating trees and kept-edge patterns."""
    if n > cap:
        raise SizeCapError(f"enumeration limited to n <= {cap}")
    p = _frac(p)
    trees = enumerate_increasing_trees(n)
    law: dict[int, Fraction] = {}
    w_tree = Fraction(1, len(trees))
    for t in trees:
        for pattern in itertools.product((False, True), repeat=n):
            k = sum(pattern)
            w = w_tree * p**k * (1 - p) ** (n - k)
            size = int(np.count_nonzero(cluster_labels(t.parent, np.array(pattern, dtype=np.bool_)) == 0))
            law[size] = law.get(size, Fraction(0)) + w
    return ExactDistribution.from_weights(law)


def exact_yule_root_type_law(n: int, p, cap: int = 6) -> ExactDistribution:
    """Root-type count at population n+1, enumerating the embedded jump chain
    (uniform parent choice, clone or mutant) and tracking types directly."""
    if n > cap:
        raise SizeCapError(f"enumeration limited to n <= {cap}")
    p = _frac(p)
    law: dict[int, Fraction] = {}

    def walk(types: tuple[bool, ...], w: Fraction):
        size = len(types)
        if size == n + 1:
            r = sum(types)
            law[r] = law.get(r, Fraction(0)) + w
            return
        for par in range(size):
            for is_clone, q in ((True, p), (False, 1 - p)):
                if q:
                    walk(types + (types[par] and is_clone,), w * q / size)

    walk((True,), Fraction(1))
    return ExactDistribution.from_weights(law)


def exact_subtree_size_law(n: int, k: int) -> ExactDistribution:
    """|T_n^k| = 1 + BetaBinomial(n - k, 1, k)."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    m = n - k

    def beta_fn(a, b):
        return Fraction(math.factorial(a - 1) * math.factorial(b - 1), math.factorial(a + b - 1))

    law = {1 + j: math.comb(m, j) * beta_fn(j + 1, m - j + k) / beta_fn(1, k) for j in range(m + 1)}
    return ExactDistribution.from_weights(law)
