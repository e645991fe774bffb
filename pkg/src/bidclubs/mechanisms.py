"""Auction mechanisms: first-price, participation revelation, composed payment rules.

All allocation is to the highest message with uniform random tie-breaking
driven by an explicit seed.  Payment rules are per-agent objects so that
the composed mechanism can charge different winners by different rules
while keeping a single allocation rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bidclubs.bid_engine import equilibrium_bid_mixture
from bidclubs.distributions import (CountDistribution, ValuationDistribution,
                                    compose_count_distribution, require_min_two)
from bidclubs.errors import InvalidParameterError, NoParticipantsError
from bidclubs.rngutil import as_generator

#: The null message: abstain from bidding (guaranteed utility 0).
ABSTAIN = object()


@dataclass(frozen=True)
class Bid:
    agent_id: int
    amount: float

    def __post_init__(self):
        if not math.isfinite(self.amount) or self.amount < 0.0:
            raise InvalidParameterError(f"bid amount must be finite and >= 0, got {self.amount}")


@dataclass
class AuctionOutcome:
    winner: int | None
    transfers_to_center: dict[int, float]
    transfers_to_coordinator: dict[int, float]
    allocation: dict[int, int]
    rejected_bids: tuple[Bid, ...] = ()

    def payment_of(self, agent_id) -> float:
        return (self.transfers_to_center.get(agent_id, 0.0)
                + self.transfers_to_coordinator.get(agent_id, 0.0))


def _resolve_highest(ids, amounts, rng):
    amounts = np.asarray(amounts, dtype=float)
    top = amounts.max()
    tied = [i for i, a in zip(ids, amounts) if a == top]
    if len(tied) == 1:
        return tied[0], top
    return tied[int(rng.integers(len(tied)))], top


def run_first_price(bids, rng_seed) -> AuctionOutcome:
    """Highest bid wins and pays its own amount; losers pay nothing."""
    bids = list(bids)
    if not bids:
        raise NoParticipantsError("first-price auction requires at least one bid")
    rng = as_generator(rng_seed)
    winner, top = _resolve_highest([b.agent_id for b in bids],
                                   [b.amount for b in bids], rng)
    center = {b.agent_id: 0.0 for b in bids}
    center[winner] = top
    return AuctionOutcome(
        winner=winner,
        transfers_to_center=center,
        transfers_to_coordinator={b.agent_id: 0.0 for b in bids},
        allocation={b.agent_id: int(b.agent_id == winner) for b in bids})


def run_participation_revelation(registrants, bid_phase, rng_seed):
    """Two-phase first-price auction with the registrant count announced.

    ``bid_phase`` maps the announced registrant count to the list of bids;
    bids from ids that never registered are discarded (recorded on the
    outcome) before the first-price rules are applied.
    Returns (announced_n, outcome).
    """
    registrants = list(registrants)
    if not registrants:
        raise InvalidParameterError("at least one registrant is required")
    if len(set(registrants)) != len(registrants):
        raise InvalidParameterError("duplicate registrant ids")
    announced_n = len(registrants)
    allowed = set(registrants)
    bids = list(bid_phase(announced_n))
    accepted = [b for b in bids if b.agent_id in allowed]
    rejected = tuple(b for b in bids if b.agent_id not in allowed)
    outcome = run_first_price(accepted, rng_seed)
    outcome.rejected_bids = rejected
    return announced_n, outcome


# ---------------------------------------------------------------------------
# payment rules
# ---------------------------------------------------------------------------

class PaymentRule:
    """Maps (winning declaration, announced count) to a payment amount."""

    def payment(self, declaration: float, announced_n: int) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        return type(self).__name__


class FirstPricePayment(PaymentRule):
    """Pay the declared amount (the classical first-price rule)."""

    def payment(self, declaration, announced_n):
        return float(declaration)


class MixturePayment(PaymentRule):
    """Pay the equilibrium bid at the declaration under a fixed count pmf."""

    def __init__(self, valuations: ValuationDistribution, counts: CountDistribution):
        require_min_two(counts)
        self.valuations = valuations
        self.counts = counts

    def payment(self, declaration, announced_n):
        v = min(max(float(declaration), self.valuations.support_lo),
                self.valuations.support_hi)
        return equilibrium_bid_mixture(v, self.counts, self.valuations)

    def describe(self):
        return f"mixture-bid{self.counts.as_pairs()}"


class EquilibriumPayment(PaymentRule):
    """Pay the equilibrium bid under the posterior count model for a signal.

    The count pmf is composed from the announced registrant count and the
    bidder's own club-size signal at payment time.
    """

    def __init__(self, valuations: ValuationDistribution, club_sizes, signal: int):
        self.valuations = valuations
        self.club_sizes = club_sizes
        self.signal = int(signal)

    def payment(self, declaration, announced_n):
        counts = compose_count_distribution(announced_n, self.signal, self.club_sizes)
        v = min(max(float(declaration), self.valuations.support_lo),
                self.valuations.support_hi)
        return equilibrium_bid_mixture(v, counts, self.valuations)

    def describe(self):
        return f"posterior-bid(signal={self.signal})"


class GridEquilibriumPayment(PaymentRule):
    """Exact discrete analogue of the equilibrium payment on a value grid.

    For declarations restricted to a finite uniformly weighted grid the
    continuous bid formula is only approximately incentive compatible.
    This rule charges T(j)/W(j), where W(j) is the exact win share of
    grid declaration j against iid truthful grid opponents (counts drawn
    from ``counts``, ties split uniformly) and T(j) is the running sum of
    grid values weighted by the win-share increments.  Truth-telling is
    then exactly optimal, which is what the composed-mechanism
    equilibrium statement requires of each component rule.
    """

    def __init__(self, grid_values, counts: CountDistribution):
        grid = np.asarray(grid_values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise InvalidParameterError("grid must be strictly increasing with >= 2 points")
        require_min_two(counts)
        self.grid = grid
        self.counts = counts
        g = grid.size
        shares = np.zeros(g)
        for m, p in counts.as_pairs():
            if p > 0.0:
                shares += p * self._win_shares(g, m - 1)
        increments = np.diff(np.concatenate([[0.0], shares]))
        expected_pay = np.cumsum(grid * increments)
        with np.errstate(invalid="ignore", divide="ignore"):
            pay = np.where(shares > 0.0, expected_pay / np.where(shares > 0, shares, 1.0), grid)
        self.win_share = shares
        self.pay = pay

    @staticmethod
    def _win_shares(g, opponents):
        # win share of grid index j against `opponents` iid uniform grid
        # draws with uniform tie splitting; closed form of the tie sum
        j = np.arange(g, dtype=float)
        a = j / g
        b = (j + 1.0) / g
        r = opponents + 1
        return (b ** r - a ** r) / (r * (b - a))

    def index_of(self, declaration) -> int:
        idx = int(np.argmin(np.abs(self.grid - declaration)))
        if abs(self.grid[idx] - declaration) > 1e-9:
            raise InvalidParameterError(f"declaration {declaration} is not a grid point")
        return idx

    def payment(self, declaration, announced_n):
        return float(self.pay[self.index_of(declaration)])

    def describe(self):
        return f"grid-bid({self.grid.size}pt,{self.counts.as_pairs()})"


def run_composed_mechanism(declarations, announced_n, rng_seed) -> AuctionOutcome:
    """Allocate to the highest declaration; charge the winner by its own rule.

    ``declarations`` is an iterable of (agent_id, declared_value,
    payment_rule).  Losers pay nothing, so the allocation depends only on
    the declarations while payments depend only on the winner's rule.
    """
    decls = list(declarations)
    if not decls:
        raise NoParticipantsError("composed mechanism requires at least one declaration")
    rng = as_generator(rng_seed)
    ids = [d[0] for d in decls]
    amounts = [d[1] for d in decls]
    winner, _ = _resolve_highest(ids, amounts, rng)
    center = {i: 0.0 for i in ids}
    for agent_id, declared, rule in decls:
        if agent_id == winner:
            center[agent_id] = float(rule.payment(declared, announced_n))
    return AuctionOutcome(
        winner=winner,
        transfers_to_center=center,
        transfers_to_coordinator={i: 0.0 for i in ids},
        allocation={i: int(i == winner) for i in ids})


def composed_win_shares(declarations):
    """Exact win probability per agent under the uniform tie-break rule."""
    decls = list(declarations)
    top = max(d[1] for d in decls)
    tied = [d[0] for d in decls if d[1] == top]
    share = 1.0 / len(tied)
    return {d[0]: (share if d[0] in tied else 0.0) for d in decls}


# ---------------------------------------------------------------------------
# Monte Carlo best response
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BestResponse:
    action: object
    utility: float
    stderr: float
    utilities: tuple = field(default=(), repr=False)


def best_response_value(value, action_grid, env_sampler, trials, rng_seed,
                        payment_rule: PaymentRule | None = None,
                        include_abstain: bool = True) -> BestResponse:
    """Grid-search best response against a sampled opposing-bid environment.

    ``env_sampler(rng, trials)`` returns (announced counts, highest
    opposing bid) as arrays; the same draw is reused for every action
    (common random numbers), so utility comparisons across the grid are
    low variance.  ``payment_rule`` of None means first-price (pay the
    action itself).  The abstain action has utility exactly 0.
    Returns the argmax action with its mean utility and standard error.
    """
    actions = list(action_grid)
    if not actions:
        raise InvalidParameterError("action grid must be nonempty")
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    rng = as_generator(rng_seed)
    announced, opposing = env_sampler(rng, int(trials))
    announced = np.asarray(announced)
    opposing = np.asarray(opposing, dtype=float)

    best = None
    means = []
    for a in actions:
        if payment_rule is None:
            pay = float(a)
        else:
            pay = np.empty(opposing.shape)
            for n in np.unique(announced):
                pay[announced == n] = payment_rule.payment(a, int(n))
        u = np.where(a > opposing, value - pay, 0.0)
        mean = float(u.mean())
        se = float(u.std(ddof=1) / np.sqrt(u.size)) if u.size > 1 else 0.0
        means.append(mean)
        if best is None or mean > best.utility:
            best = BestResponse(a, mean, se)
    if include_abstain and best.utility < 0.0:
        best = BestResponse(ABSTAIN, 0.0, 0.0)
    return BestResponse(best.action, best.utility, best.stderr, tuple(means))
