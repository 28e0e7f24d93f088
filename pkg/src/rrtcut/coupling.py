"""The xi random walk, its last passage below a level, and its coupling with
root isolation.

``xi`` takes value j with probability 1/(j(j+1)); the walk S has i.i.d.
xi steps and ``L(n) = max{k : S_k <= n}``.  Severed sizes of the root
isolation process agree with the first L(n) steps of a suitably built walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_tree import sample_rrt
from .destruction import IsolationResult, isolate_root, sample_destruction
from .errors import StructureError
from .rng import as_generator


def xi_from_uniform(u: float) -> int:
    """Inversion: floor(1/u) for u in (0, 1]."""
    if not 0.0 < u <= 1.0:
        raise ValueError("u must lie in (0, 1]")
    return int(math.floor(1.0 / u))


def xi_tail_from_uniform(u: float, m: int) -> int:
    """xi conditioned on xi >= m, by inversion: P(xi >= j | xi >= m) = m/j."""
    if not 0.0 < u <= 1.0:
        raise ValueError("u must lie in (0, 1]")
    return int(math.floor(m / u))


def sample_xi(rng=None) -> int:
    rng = as_generator(rng)
    return xi_from_uniform(1.0 - rng.random())


def sample_xi_array(size: int, rng=None) -> np.ndarray:
    rng = as_generator(rng)
    return np.floor(1.0 / (1.0 - rng.random(size))).astype(np.int64)


@dataclass(frozen=True)
class RandomWalkPath:
    """Steps up to and including the first one that carries S above ``level``."""

    level: int
    steps: tuple[int, ...]

    def __post_init__(self):
        if any(s < 1 for s in self.steps):
            raise ValueError("steps must be positive")
        total = sum(self.steps)
        if total <= self.level or total - self.steps[-1] > self.level:
            raise ValueError("the last step, and only it, must exceed the level")

    @property
    def sums(self) -> tuple[int, ...]:
        return tuple(np.cumsum((0,) + self.steps).tolist())

    @property
    def last_passage(self) -> int:
        return len(self.steps) - 1

    @property
    def overshoot(self) -> int:
        """n - S_{L(n)}, the distance from the last sum below the level."""
        return self.level - (sum(self.steps) - self.steps[-1])

    @classmethod
    def from_steps(cls, steps: Sequence[int], level: int) -> "RandomWalkPath":
        """Truncate ``steps`` right after the first partial sum above ``level``."""
        s = 0
        for k, x in enumerate(steps):
            s += x
            if s > level:
                return cls(level, tuple(int(v) for v in steps[: k + 1]))
        raise ValueError("steps never exceed the level")


def walk_to_level(n: int, rng=None) -> RandomWalkPath:
    if n < 1:
        raise ValueError("need n >= 1")
    rng = as_generator(rng)
    steps = []
    s = 0
    while s <= n:
        x = sample_xi(rng)
        steps.append(x)
        s += x
    return RandomWalkPath(n, tuple(steps))


@dataclass(frozen=True)
class CoupledIsolation:
    walk: RandomWalkPath
    isolation: IsolationResult
    nested_sizes: tuple[int, ...]

    def check(self) -> None:
        """Raise unless X_n >= L(n), the severed sizes agree with the first
        L(n) steps, and X_n <= L(n) + n - S_{L(n)}."""
        L = self.walk.last_passage
        x = self.isolation.cuts
        if x < L:
            raise StructureError(f"X_n = {x} < L(n) = {L}")
        if self.isolation.severed_sizes[:L] != self.walk.steps[:L]:
            raise StructureError("severed sizes disagree with the walk")
        if x > L + self.walk.overshoot:
            raise StructureError("X_n exceeds L(n) + n - S_L(n)")


def couple_walk(severed_sizes: Sequence[int], n: int, eps_rng, eta_rng) -> RandomWalkPath:
    """Walk built from an isolation run with Bernoulli switches.

    Before step i the root component has size s.  With probability 1 - 1/s
    the step is the size cut off next; otherwise it is drawn from xi
    conditioned on xi >= s, which carries the walk above n.
    """
    s = n + 1
    steps = []
    i = 0
    while True:
        if s == 1 or eps_rng.random() < 1.0 / s:
            steps.append(xi_tail_from_uniform(1.0 - eta_rng.random(), s))
            return RandomWalkPath(n, tuple(steps))
        steps.append(int(severed_sizes[i]))
        s -= severed_sizes[i]
        i += 1


def coupled_isolation(n: int, rng=None) -> CoupledIsolation:
    if n < 1:
        raise ValueError("need n >= 1")
    rng = as_generator(rng)
    tree_rng, order_rng, eps_rng, eta_rng = rng.spawn(4)
    tree = sample_rrt(n, tree_rng)
    iso = isolate_root(sample_destruction(tree, order_rng))
    walk = couple_walk(iso.severed_sizes, n, eps_rng, eta_rng)
    nested = tuple((n + 1 - np.cumsum((0,) + iso.severed_sizes)).tolist())
    return CoupledIsolation(walk, iso, nested)


def cauchy_statistic(x_n: float, n: int) -> float:
    """(ln^2 n / n) x_n - ln n - ln ln n."""
    if n < 3:
        raise ValueError("need n >= 3")
    ln = math.log(n)
    return ln * ln / n * x_n - ln - math.log(ln)


def cauchy_statistic_array(x: np.ndarray, n: int) -> np.ndarray:
    if n < 3:
        raise ValueError("need n >= 3")
    ln = math.log(n)
    return ln * ln / n * np.asarray(x, dtype=np.float64) - ln - math.log(ln)
