"""Reference limit laws and goodness-of-fit tools.

The completely asymmetric Cauchy law with characteristic function
``exp(i t ln|t| - pi |t| / 2)`` has no closed-form CDF.  It is evaluated by
Gil-Pelaez inversion with a compiled composite Gauss-Legendre rule, and
cross-checked against a non-oscillatory integral representation of the
same stable law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy import integrate, optimize, special, stats as sps

from .errors import QuadratureError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)

# below T_LO the integrand is ln t - x up to O(t ln^2 t); above T_HI the
# damping e^{-pi t/2}/t is below 1e-17
_T_LO = 1e-12
_T_HI = 26.0
# the right tail is doubly exponential: 1 - F(6) is about 1e-66
_X_ONE = 6.0


@njit(cache=True)
def _integrand(t, x):
    return math.exp(-0.5 * math.pi * t) * math.sin(t * math.log(t) - t * x) / t


@njit(cache=True)
def _panel(lo, hi, x, gx, gw):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    s = 0.0
    for j in range(gx.size):
        s += gw[j] * _integrand(mid + half * gx[j], x)
    return s * half


@njit(cache=True)
def _freq(t, x):
    # derivative of the phase t ln t - t x
    return abs(math.log(t) + 1.0 - x)


@njit(cache=True)
def _segment(lo, hi, x, res, gx, gw):
    """Integral over [lo, hi] split so each piece spans <= pi/res radians."""
    w = max(_freq(lo, x), _freq(hi, x)) + 1.0
    pieces = int(math.ceil((hi - lo) * w * res / math.pi))
    if pieces < 1:
        pieces = 1
    h = (hi - lo) / pieces
    s = 0.0
    for k in range(pieces):
        s += _panel(lo + k * h, lo + (k + 1) * h, x, gx, gw)
    return s


@njit(cache=True)
def _gil_pelaez_integral(x, res, gx, gw):
    # analytic piece near 0: integral of ln t - x over [0, T_LO]
    total = _T_LO * (math.log(_T_LO) - 1.0) - x * _T_LO
    lo = _T_LO
    while lo < 1.0:
        hi = min(2.0 * lo, 1.0)
        total += _segment(lo, hi, x, res, gx, gw)
        lo = hi
    # the phase derivative changes sign at t = e^{x-1}; split there
    lo = 1.0
    while lo < _T_HI:
        hi = lo + 1.0
        turn = math.exp(x - 1.0)
        if lo < turn < hi:
            total += _segment(lo, turn, x, res, gx, gw)
            total += _segment(turn, hi, x, res, gx, gw)
        else:
            total += _segment(lo, hi, x, res, gx, gw)
        lo = hi
    return total


@njit(cache=True)
def _cdf_many(xs, tol, base_res, max_doublings, gx, gw, out, status):
    for i in range(xs.size):
        x = xs[i]
        if x >= _X_ONE:
            out[i] = 1.0
            status[i] = 1
            continue
        res = base_res
        prev = _gil_pelaez_integral(x, res, gx, gw)
        ok = False
        for _ in range(max_doublings):
            res *= 2.0
            cur = _gil_pelaez_integral(x, res, gx, gw)
            if abs(cur - prev) <= tol * math.pi:
                ok = True
                prev = cur
                break
            prev = cur
        out[i] = 0.5 - prev / math.pi
        status[i] = 1 if ok else 0


def cauchy_limit_cdf(x, tol: float = 1e-9, resolution: float = 0.5):
    """CDF of the completely asymmetric Cauchy law.

    Accepts a scalar or an array.  Each value is accepted once two
    successive halvings of the panel width agree to ``tol``; otherwise
    :class:`QuadratureError` is raised.  ``resolution`` scales the initial
    number of panels per half-oscillation.  Values are clamped to [0, 1]
    and made nondecreasing across the points of one call, which only moves
    them by rounding noise.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    status = np.empty(flat.size, dtype=np.int64)
    _cdf_many(flat, tol, float(resolution), 6, _GL_X, _GL_W, out, status)
    if not status.all():
        bad = flat[status == 0]
        raise QuadratureError(f"Gil-Pelaez quadrature did not settle at x = {bad[:5]}")
    out = np.clip(out, 0.0, 1.0)
    idx = np.argsort(flat, kind="stable")
    out[idx] = np.maximum.accumulate(out[idx])
    out = out.reshape(arr.shape)
    return float(out[0]) if np.ndim(x) == 0 else out


def cauchy_limit_cdf_oracle(x: float) -> float:
    """Same CDF from the Zolotarev integral of a maximally skewed 1-stable law.

    With W = 2X/pi and d = (2/pi) ln(2/pi), W - d is standard 1-stable with
    skewness -1, so F(x) = 1 - G(d - 2x/pi) where G is the skewness +1 CDF
    G(y) = (1/pi) int_{-pi/2}^{pi/2} exp(-e^{-pi y/2} V(u)) du; the complement
    is integrated directly to keep precision in the left tail.
    """
    y = (2 / math.pi) * math.log(2 / math.pi) - 2 * x / math.pi
    log_c = -math.pi * y / 2

    def log_cv(u):
        a = math.pi / 2 + u
        return log_c + math.log(2 / math.pi) + math.log(a) - math.log(math.cos(u)) + a * math.tan(u)

    def integrand(u):
        if u <= -math.pi / 2 or u >= math.pi / 2:
            return 0.0 if u <= -math.pi / 2 else 1.0
        lv = log_cv(u)
        if lv > 700:
            return 1.0
        return -math.expm1(-math.exp(lv))

    # c V(u) increases from 0 to infinity and the integrand switches on near
    # c V = 1; splitting at a few level sets keeps every piece smooth
    lo, hi = -math.pi / 2 + 1e-15, math.pi / 2 - 1e-15
    cuts = [-math.pi / 2]
    for level in (-20.0, -3.0, 0.0, 3.0):
        f_lo, f_hi = log_cv(lo) - level, log_cv(hi) - level
        if f_lo < 0 < f_hi:
            u = optimize.brentq(lambda v: log_cv(v) - level, lo, hi, xtol=1e-15)
            if u > cuts[-1]:
                cuts.append(u)
    cuts.append(math.pi / 2)
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=400)
        total += val
    return total / math.pi


def beta_cdf(x, a: float, b: float):
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    return special.betainc(a, b, np.clip(x, 0.0, 1.0))


def order_stat_cdf(x, i: int, ell: int):
    """CDF of the i-th smallest of ell i.i.d. uniforms: I_x(i, ell - i + 1)."""
    if not 1 <= i <= ell:
        raise ValueError("need 1 <= i <= ell")
    return beta_cdf(x, i, ell - i + 1)


def frechet_cdf(x, c: float):
    """exp(-c/x) for x > 0, else 0: the largest atom of a Poisson measure c x^-2 dx."""
    if c <= 0:
        raise ValueError("c must be positive")
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0, np.exp(-c / np.where(x > 0, x, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    return special.ndtr(x)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def schweinsberg_limit_cdf(y, t: float):
    """CDF of t e^{-t} (X - ln t) with X the asymmetric Cauchy variable."""
    if t <= 0:
        raise ValueError("t must be positive")
    scale = t * math.exp(-t)
    return cauchy_limit_cdf(np.asarray(y, dtype=np.float64) / scale + math.log(t))


@dataclass(frozen=True)
class ReferenceCDF:
    """A named CDF; calling it evaluates the CDF elementwise."""

    name: str
    params: dict
    evaluator: Callable = field(repr=False)

    def __call__(self, x):
        return self.evaluator(x, **self.params)

    @classmethod
    def cauchy(cls) -> "ReferenceCDF":
        return cls("asymmetric_cauchy", {}, cauchy_limit_cdf)

    @classmethod
    def beta(cls, a: float, b: float) -> "ReferenceCDF":
        return cls("beta", {"a": a, "b": b}, beta_cdf)

    @classmethod
    def order_stat(cls, i: int, ell: int) -> "ReferenceCDF":
        return cls("order_stat", {"i": i, "ell": ell}, order_stat_cdf)

    @classmethod
    def frechet(cls, c: float) -> "ReferenceCDF":
        return cls("frechet", {"c": c}, frechet_cdf)

    @classmethod
    def normal(cls) -> "ReferenceCDF":
        return cls("normal", {}, normal_cdf)

    @classmethod
    def uniform(cls) -> "ReferenceCDF":
        return cls("uniform", {}, uniform_cdf)

    @classmethod
    def schweinsberg(cls, t: float) -> "ReferenceCDF":
        return cls("schweinsberg", {"t": t}, schweinsberg_limit_cdf)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.float64).ravel())
        if v.size == 0:
            raise ValueError("empty sample")
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return self.values.size

    def cdf(self, x):
        return np.searchsorted(self.values, x, side="right") / self.count

    def mean(self) -> float:
        return float(self.values.mean())


def _as_empirical(sample) -> EmpiricalDistribution:
    return sample if isinstance(sample, EmpiricalDistribution) else EmpiricalDistribution(sample)


def ks_statistic(sample, ref: Callable) -> float:
    """Sup distance between the empirical CDF of ``sample`` and ``ref``."""
    emp = _as_empirical(sample)
    m = emp.count
    # evaluate the reference once per distinct value
    uniq, inv = np.unique(emp.values, return_inverse=True)
    f = np.asarray(ref(uniq), dtype=np.float64)[inv]
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS distance and p-value."""
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    r = sps.ks_2samp(a, b)
    return float(r.statistic), float(r.pvalue)


def chi_square(counts: Sequence[int], probs: Sequence[float]) -> tuple[float, float]:
    """Pearson statistic and p-value with len(counts) - 1 degrees of freedom."""
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    if counts.size == 0 or counts.sum() == 0:
        raise ValueError("empty sample")
    if counts.shape != probs.shape:
        raise ValueError("counts and probs differ in shape")
    if not math.isclose(probs.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError("probs must sum to 1")
    expected = counts.sum() * probs
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, float(sps.chi2.sf(stat, counts.size - 1))


def atom_z_scores(values: np.ndarray, support: Sequence[int], probs: Sequence[float]) -> tuple[np.ndarray, bool]:
    """Per-atom z-scores of empirical frequencies, and whether the empirical
    support lies inside the given support."""
    values = np.asarray(values)
    m = values.size
    support = np.asarray(support)
    probs = np.asarray(probs, dtype=np.float64)
    inside = bool(np.isin(values, support).all())
    freq = np.array([np.count_nonzero(values == s) for s in support]) / m
    se = np.sqrt(probs * (1 - probs) / m)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (freq - probs) / se, np.where(freq == probs, 0.0, np.inf))
    return z, inside


def alpha_constants(tol: float = 1e-12) -> tuple[float, float]:
    """The two roots of a ln(2e/a) = 1, by bisection on each side of a = 2."""

    def f(a):
        return a * math.log(2 * math.e / a) - 1.0

    def bisect(lo, hi):
        flo = f(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # f increases on (0, 2], peaks at f(2) = 1, and decreases afterwards
    return bisect(1e-9, 2.0), bisect(2.0, 2 * math.e)
