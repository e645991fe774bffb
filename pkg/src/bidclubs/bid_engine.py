"""Symmetric equilibrium bids for first-price auctions.

With exactly n bidders and value distribution F the equilibrium bid is

    bid(v, n) = v - integral_lo^v (F(u)/F(v))**(n-1) du,

computed by adaptive Simpson quadrature on the normalized integrand (the
normalization keeps the absolute tolerance on the bid itself and avoids
overflow of F**-(n-1) near the lower support end).  With a stochastic
number of bidders drawn from a count pmf P the bid is the probability
weighted sum of the fixed-n bids over P's support.

Scalar entry points are exact-path evaluators (tolerance 1e-10,
memoized); :class:`BidFunction` adds a batched evaluator backed by a
prefix quadrature table for the Monte Carlo loops.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from bidclubs import _kernel
from bidclubs.distributions import CountDistribution, ValuationDistribution, require_min_two
from bidclubs.errors import InvalidParameterError, PreconditionViolationError

DEFAULT_TOL = 1e-10
MAX_DEPTH = 60
# Below this cdf value the bid is pinned to v itself: the shading term
# vanishes in the limit and the quadrature would chase a 0/0 ratio.
SMALL_CDF = 1e-8

TABLE_CELLS = 4096

_table_cache: dict = {}
_table_lock = threading.Lock()


def _check_fixed_args(v, n, valuations):
    if int(n) != n or n < 2:
        raise InvalidParameterError(f"n must be an integer >= 2, got {n}")
    if not (valuations.support_lo <= v <= valuations.support_hi):
        raise InvalidParameterError(
            f"valuation {v} outside support [{valuations.support_lo}, {valuations.support_hi}]")


@lru_cache(maxsize=1 << 17)
def _fixed_bid_cached(valuations, v, n, tol):
    shading = _kernel.shading_scalar(
        valuations.kind, valuations.alpha, valuations.cdf,
        valuations.support_lo, valuations.support_hi, v, n, tol, MAX_DEPTH)
    bid = v - shading
    return min(max(bid, valuations.support_lo), v)


def equilibrium_bid_fixed(v, n, valuations: ValuationDistribution,
                          tol: float = DEFAULT_TOL) -> float:
    """Equilibrium bid with exactly n bidders; result lies in [support_lo, v]."""
    v = float(v)
    _check_fixed_args(v, n, valuations)
    fv = _kernel.cdf_one(valuations.kind, valuations.alpha, valuations.cdf,
                         valuations.support_lo, valuations.support_hi, v)
    if fv < SMALL_CDF:
        return v
    return _fixed_bid_cached(valuations, v, int(n), float(tol))


def equilibrium_bid_mixture(v, counts: CountDistribution,
                            valuations: ValuationDistribution,
                            tol: float = DEFAULT_TOL) -> float:
    """Probability-weighted equilibrium bid over a finite count pmf.

    Linear in the pmf by construction; requires zero mass below count 2.
    """
    require_min_two(counts)
    return float(sum(p * equilibrium_bid_fixed(v, j, valuations, tol)
                     for j, p in counts.as_pairs() if p > 0.0))


def _prefix_table(valuations, n, cells=TABLE_CELLS):
    key = (valuations, n, cells)
    with _table_lock:
        table = _table_cache.get(key)
    if table is None:
        table = _kernel.prefix_table(
            valuations.kind, valuations.alpha, valuations.cdf,
            valuations.support_lo, valuations.support_hi, n, cells)
        with _table_lock:
            _table_cache[key] = table
    return table


def bid_fixed_many(vs, n, valuations: ValuationDistribution) -> np.ndarray:
    """Batched fixed-n bids via the prefix quadrature table.

    Accuracy is a little looser than the scalar path (worst case around
    1e-9 for hard densities); intended for Monte Carlo volumes.
    """
    vs = np.asarray(vs, dtype=np.float64)
    lo, hi = valuations.support_lo, valuations.support_hi
    table = _prefix_table(valuations, int(n))
    raw = _kernel.integral_from_table(
        table, valuations.kind, valuations.alpha, valuations.cdf, lo, hi, int(n), vs)
    fv = _kernel.cdf_many(valuations.kind, valuations.alpha, valuations.cdf, lo, hi, vs)
    denom = fv ** (int(n) - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        bids = vs - raw / denom
    bids = np.where((fv < SMALL_CDF) | (denom == 0.0), vs, bids)
    return np.clip(bids, lo, vs)


class BidFunction:
    """Equilibrium bid map for a fixed bidder count or a count pmf.

    The callable form evaluates the exact scalar path; ``many`` uses the
    batched table path.  Instances are immutable and safe to share.
    """

    def __init__(self, valuations: ValuationDistribution, count_model,
                 tol: float = DEFAULT_TOL):
        self.valuations = valuations
        self.tol = tol
        if isinstance(count_model, CountDistribution):
            require_min_two(count_model)
            self.counts = count_model
            self.fixed_n = None
        else:
            if int(count_model) != count_model or count_model < 2:
                raise InvalidParameterError(
                    f"fixed bidder count must be an integer >= 2, got {count_model}")
            self.counts = None
            self.fixed_n = int(count_model)

    def __call__(self, v) -> float:
        if self.fixed_n is not None:
            return equilibrium_bid_fixed(v, self.fixed_n, self.valuations, self.tol)
        return equilibrium_bid_mixture(v, self.counts, self.valuations, self.tol)

    def many(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.float64)
        if self.fixed_n is not None:
            return bid_fixed_many(vs, self.fixed_n, self.valuations)
        out = np.zeros(vs.shape, dtype=np.float64)
        for j, p in self.counts.as_pairs():
            if p > 0.0:
                out += p * bid_fixed_many(vs, j, self.valuations)
        return out


@dataclass(frozen=True)
class MonotonicityViolation:
    pair_index: int
    v: float
    bid_lo: float
    bid_hi: float


def verify_dominance_monotonicity(valuations: ValuationDistribution,
                                  pairs, v_grid,
                                  tol: float = DEFAULT_TOL):
    """Check that tail-dominance strictly raises the mixture bid.

    ``pairs`` is an iterable of (P_lo, P_hi) with P_hi dominating P_lo in
    the tail order (checked; violations of the precondition raise).
    Returns every (pair, v) with bid(v, P_lo) >= bid(v, P_hi) for grid
    points above the lower support end; an empty list certifies the
    monotonicity property for this F on the grid.
    """
    from bidclubs.distributions import dominates

    out = []
    for idx, (p_lo, p_hi) in enumerate(pairs):
        if not dominates(p_hi, p_lo):
            raise PreconditionViolationError(
                f"pair {idx}: second pmf does not dominate the first")
        for v in v_grid:
            if v <= valuations.support_lo:
                continue  # bids tie at the lower support end
            b_lo = equilibrium_bid_mixture(v, p_lo, valuations, tol)
            b_hi = equilibrium_bid_mixture(v, p_hi, valuations, tol)
            if b_lo >= b_hi:
                out.append(MonotonicityViolation(idx, float(v), b_lo, b_hi))
    return out
