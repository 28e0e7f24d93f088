"""Counter-based random streams.

Every trial owns its randomness: a stream is keyed by ``(seed, trial, tag)``
and the k-th draw is a pure function of that key and ``k`` (SplitMix64
finalizer applied to ``key + k * golden``).  Trial results therefore do not
depend on how trials are scheduled across threads.

Two front ends share the keying scheme:

* compiled kernels use :func:`stream_key` / :func:`next_uniform` on a one
  element ``uint64`` state array;
* Python-level API functions take a :class:`numpy.random.Generator`, and
  :func:`trial_rng` builds one on a Philox bit generator keyed the same way.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# stream tags; one independent sub-stream per purpose inside a trial
TAG_TREE = 1
TAG_TIMES = 2
TAG_TARGETS = 3
TAG_PERC = 4
TAG_WALK = 5
TAG_EPS = 6
TAG_ETA = 7
TAG_PICK = 8
TAG_CLOCK = 9
TAG_TIES = 10
TAG_URN = 11


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_key(seed, trial, tag):
    k = mix64(np.uint64(seed) + _GOLDEN)
    k = mix64(k ^ (np.uint64(trial) * _M1 + _GOLDEN))
    return mix64(k ^ (np.uint64(tag) * _M2 + _GOLDEN))


@njit(cache=True)
def new_state(seed, trial, tag):
    st = np.empty(1, dtype=np.uint64)
    st[0] = stream_key(seed, trial, tag)
    return st


@njit(cache=True, inline="always")
def next_u64(st):
    st[0] += _GOLDEN
    return mix64(st[0])


@njit(cache=True, inline="always")
def next_uniform(st):
    """Uniform double on [0, 1) with 53 random bits."""
    return float(next_u64(st) >> _S11) * _INV53


@njit(cache=True, inline="always")
def next_below(st, m):
    """Uniform integer on {0, ..., m-1}."""
    return int(next_uniform(st) * m)


@njit(cache=True, inline="always")
def next_xi(st):
    """Draw from P(xi = j) = 1/(j(j+1)) by inversion, xi = floor(1/U)."""
    return int(np.floor(1.0 / (1.0 - next_uniform(st))))


@njit(cache=True, inline="always")
def next_exponential(st):
    return -np.log(1.0 - next_uniform(st))


def trial_rng(seed: int, trial: int = 0, tag: int = 0) -> np.random.Generator:
    """Generator for Python-level code, keyed by ``(seed, trial, tag)``."""
    ss = np.random.SeedSequence([int(seed), int(trial), int(tag)])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
