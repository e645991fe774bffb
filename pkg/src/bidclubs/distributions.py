"""Valuation distributions and participant-count distributions.

Two families of objects live here:

* :class:`ValuationDistribution` models the continuous, atomless private
  value distribution F on a bounded support, with density and inverse cdf.
* :class:`CountDistribution` is a finite pmf over integer participant
  counts.  Club-size distributions, coordinator-count distributions and
  every posterior count model used by the bid engine are all instances.

Count pmfs are exact objects: convolution and tail comparisons are done
in plain float arithmetic and compared at absolute tolerance 1e-12,
which is far above the rounding error of the convolution sizes that
occur here (at most a few dozen factors with small support).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from bidclubs import _kernel
from bidclubs.errors import InvalidParameterError

PMF_TOL = 1e-12


# ---------------------------------------------------------------------------
# valuations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValuationDistribution:
    """Continuous private-value distribution on [support_lo, support_hi].

    ``cdf``, ``pdf`` and ``inverse_cdf`` accept scalars or numpy arrays.
    ``kind``/``alpha`` are the kernel family code used by the quadrature
    backend; custom distributions use the generic callback path.
    """

    support_lo: float
    support_hi: float
    cdf: Callable = field(repr=False)
    pdf: Callable = field(repr=False)
    inverse_cdf: Callable = field(repr=False)
    kind: int = _kernel.CUSTOM
    alpha: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if not self.support_lo < self.support_hi:
            raise InvalidParameterError(
                f"support_lo must be < support_hi, got [{self.support_lo}, {self.support_hi}]")


def _uniform_cdf(v):
    return np.clip(v, 0.0, 1.0)


def _uniform_pdf(v):
    v = np.asarray(v, dtype=float)
    out = np.where((v >= 0.0) & (v <= 1.0), 1.0, 0.0)
    return out if out.ndim else float(out)


def _identity(q):
    return q


_UNIFORM = ValuationDistribution(
    support_lo=0.0, support_hi=1.0,
    cdf=_uniform_cdf, pdf=_uniform_pdf, inverse_cdf=_identity,
    kind=_kernel.UNIFORM, alpha=1.0, name="uniform")


def uniform_valuations() -> ValuationDistribution:
    """The uniform distribution on [0, 1]."""
    return _UNIFORM


@lru_cache(maxsize=None)
def power_valuations(alpha: float) -> ValuationDistribution:
    """F(v) = v**alpha on [0, 1]; alpha=1 coincides with the uniform family."""
    alpha = float(alpha)
    if not alpha > 0.0 or not math.isfinite(alpha):
        raise InvalidParameterError(f"alpha must be a positive real, got {alpha}")

    def cdf(v, _a=alpha):
        return np.clip(v, 0.0, 1.0) ** _a

    def pdf(v, _a=alpha):
        v = np.asarray(v, dtype=float)
        inside = (v >= 0.0) & (v <= 1.0)
        out = np.where(inside, _a * np.where(inside, v, 1.0) ** (_a - 1.0), 0.0)
        return out if out.ndim else float(out)

    def inverse_cdf(q, _a=alpha):
        return np.clip(q, 0.0, 1.0) ** (1.0 / _a)

    return ValuationDistribution(
        support_lo=0.0, support_hi=1.0,
        cdf=cdf, pdf=pdf, inverse_cdf=inverse_cdf,
        kind=_kernel.POWER, alpha=alpha, name=f"power({alpha:g})")


def custom_valuations(cdf, pdf, support, inverse_cdf=None, name="custom"):
    """Wrap user-supplied cdf/pdf callables as a ValuationDistribution.

    When no inverse cdf is given, one is computed by bisection to
    absolute tolerance 1e-12 (the cdf is monotone and bracketed by the
    support, so bisection is robust).
    """
    lo, hi = float(support[0]), float(support[1])
    if inverse_cdf is None:
        def inverse_cdf(q, _lo=lo, _hi=hi, _cdf=cdf):
            return bisect_inverse(_cdf, _lo, _hi, q)
    return ValuationDistribution(
        support_lo=lo, support_hi=hi, cdf=cdf, pdf=pdf,
        inverse_cdf=inverse_cdf, kind=_kernel.CUSTOM, name=name)


def bisect_inverse(cdf, lo, hi, q, tol=1e-12):
    """Vectorized bisection solve of cdf(v) = q on [lo, hi]."""
    q = np.asarray(q, dtype=float)
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    a = np.full(q.shape, lo)
    b = np.full(q.shape, hi)
    steps = max(1, int(np.ceil(np.log2(max((hi - lo) / tol, 2.0)))))
    for _ in range(steps):
        m = 0.5 * (a + b)
        below = np.asarray(cdf(m)) < q
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    out = 0.5 * (a + b)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# participant counts
# ---------------------------------------------------------------------------

def _trimmed(min_count, probs):
    probs = [float(p) for p in probs]
    while probs and probs[0] == 0.0:
        probs.pop(0)
        min_count += 1
    while probs and probs[-1] == 0.0:
        probs.pop()
    return min_count, tuple(probs)


@dataclass(frozen=True)
class CountDistribution:
    """Finite pmf over integer counts, indexed from ``min_count``.

    Immutable after construction; exact-zero leading/trailing entries are
    trimmed so ``min_count``/``max_count`` delimit the true support.
    """

    min_count: int
    probs: tuple[float, ...]

    def __post_init__(self):
        mc, probs = _trimmed(self.min_count, self.probs)
        object.__setattr__(self, "min_count", int(mc))
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise InvalidParameterError("count pmf has no mass")
        if self.min_count < 0:
            raise InvalidParameterError("counts must be nonnegative")
        arr = np.array(probs)
        if np.any(arr < 0.0):
            raise InvalidParameterError("count pmf entries must be nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > PMF_TOL:
            raise InvalidParameterError(
                f"count pmf must sum to 1 within {PMF_TOL}, got {total!r}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point_mass(n: int) -> "CountDistribution":
        return CountDistribution(n, (1.0,))

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, float]]) -> "CountDistribution":
        items = sorted((int(c), float(p)) for c, p in pairs)
        if not items:
            raise InvalidParameterError("count pmf has no mass")
        counts = [c for c, _ in items]
        if len(set(counts)) != len(counts):
            raise InvalidParameterError("duplicate count in pmf")
        lo, hi = counts[0], counts[-1]
        probs = [0.0] * (hi - lo + 1)
        for c, p in items:
            probs[c - lo] = p
        return CountDistribution(lo, tuple(probs))

    # -- accessors ---------------------------------------------------------

    @property
    def max_count(self) -> int:
        return self.min_count + len(self.probs) - 1

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def as_pairs(self) -> tuple[tuple[int, float], ...]:
        return tuple((self.min_count + i, p) for i, p in enumerate(self.probs))

    def pmf(self, i: int) -> float:
        if self.min_count <= i <= self.max_count:
            return self.probs[i - self.min_count]
        return 0.0

    def mean(self) -> float:
        return float(sum((self.min_count + i) * p for i, p in enumerate(self.probs)))

    def tail_mass(self, i: int) -> float:
        return tail_mass(self, i)


@dataclass(frozen=True)
class ClubSizeDistribution(CountDistribution):
    """Per-coordinator membership-count pmf: support in [1, kappa].

    Requires zero mass at 0, strictly less than full mass at 1, and no
    mass above the declared maximum club size ``kappa``.
    """

    kappa: int = 2

    def __post_init__(self):
        super().__post_init__()
        if self.kappa < 2:
            raise InvalidParameterError("kappa must be an integer >= 2")
        if self.min_count < 1:
            raise InvalidParameterError("club sizes must put zero mass on count 0")
        if self.pmf(1) >= 1.0 - PMF_TOL:
            raise InvalidParameterError("mass on club size 1 must be strictly below 1")
        if self.max_count > self.kappa:
            raise InvalidParameterError(
                f"club sizes put mass above kappa={self.kappa} (max support {self.max_count})")


def require_min_two(counts: CountDistribution, what: str = "count model") -> None:
    """Reject pmfs with mass below 2 (main-auction count models)."""
    if counts.min_count < 2:
        raise InvalidParameterError(f"{what} must put zero mass below count 2")


# ---------------------------------------------------------------------------
# operations on count pmfs
# ---------------------------------------------------------------------------

def tail_mass(dist: CountDistribution, i: int) -> float:
    """Total probability of counts >= i."""
    if i < 0:
        raise InvalidParameterError("tail index must be >= 0")
    if i <= dist.min_count:
        return float(sum(dist.probs))
    if i > dist.max_count:
        return 0.0
    return float(sum(dist.probs[i - dist.min_count:]))


def _tail_array(dist, i_hi):
    # tails at indices 0..i_hi inclusive, computed by suffix summation
    arr = np.zeros(i_hi + 2)
    for c, p in dist.as_pairs():
        if c <= i_hi:
            arr[c] = p
    suffix = np.cumsum(arr[::-1])[::-1]
    extra = tail_mass(dist, i_hi + 1)  # mass strictly above the window
    return suffix[: i_hi + 1] + extra


def dominates(p_hi: CountDistribution, p_lo: CountDistribution,
              tol: float = PMF_TOL) -> bool:
    """Strict tail-mass order: True iff p_lo < p_hi.

    The order requires an index l with all lower tails equal and all
    tails from l upward strictly larger under ``p_hi``.  With finite
    supports the strict clause is checked up to the maximum support
    point of ``p_hi`` (beyond it every tail is zero on both sides, so an
    unbounded strict clause could never hold).  Tail comparisons use
    absolute tolerance ``tol``.
    """
    i_hi = p_hi.max_count
    t_hi = _tail_array(p_hi, i_hi)
    t_lo = _tail_array(p_lo, i_hi)
    diff = t_hi - t_lo
    differs = np.abs(diff) > tol
    if not differs.any():
        return False
    l = int(np.argmax(differs))
    return bool(np.all(diff[l:] > tol))


def convolve(a: CountDistribution, b: CountDistribution) -> CountDistribution:
    """Pmf of the sum of independent draws from ``a`` and ``b``."""
    probs = np.convolve(a.as_array(), b.as_array())
    return CountDistribution(a.min_count + b.min_count, tuple(probs))


def shift(dist: CountDistribution, k: int) -> CountDistribution:
    """Add a deterministic k to the count."""
    return CountDistribution(dist.min_count + int(k), dist.probs)


def compose_count_distribution(n: int, k: int,
                               club_sizes: CountDistribution) -> CountDistribution:
    """Posterior count model given n registrants and own club size k.

    The total is k own-club members plus the sizes of the n-1 other
    registered clubs, each drawn independently from ``club_sizes``; the
    pmf is built by exact iterated convolution, so the support is
    exactly [k + (n-1)*min, k + (n-1)*max].
    """
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"n must be an integer >= 2, got {n}")
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"k must be an integer >= 1, got {k}")
    kappa = getattr(club_sizes, "kappa", None)
    if kappa is not None and k > kappa:
        raise InvalidParameterError(f"k={k} exceeds kappa={kappa}")
    acc = np.array([1.0])
    base = club_sizes.as_array()
    for _ in range(int(n) - 1):
        acc = np.convolve(acc, base)
    min_count = int(k) + (int(n) - 1) * club_sizes.min_count
    return CountDistribution(min_count, tuple(acc))
