"""Coordinator protocol for bidding clubs in first-price auctions.

A coordinator invites k >= 2 agents.  Every invitee either declines (and
then participates in the main auction on its own) or accepts by sending
a declared valuation.  If everyone accepts, only the highest declarer is
registered, with the singleton-posterior bid; the winner then owes the
coordinator the gap up to the size-k-posterior bid.  If anyone declines,
the coordinator registers each acceptor with the size-k-posterior bid
for the count that ends up being announced (the protocol prescribes this
even though a disbanded club changes the true count model; that is its
fixed off-path behavior).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bidclubs.bid_engine import BidFunction, equilibrium_bid_mixture
from bidclubs.distributions import compose_count_distribution
from bidclubs.environment import EnvironmentConfig, sample_dense
from bidclubs.errors import (InvalidParameterError, ProtocolOrderError,
                             ScenarioUnavailableError)
from bidclubs.rngutil import as_generator, spawned

#: Response message for an invitee who stays out of the club.
DECLINE = object()

COLLECTING = "collecting"
REGISTERED = "registered"
SETTLED = "settled"


@dataclass(frozen=True)
class Settlement:
    main_auction_payment: float
    coordinator_payment: float
    paying_agent: int | None


@dataclass
class ClubState:
    club_id: int
    invited: tuple[int, ...]
    responses: dict = field(default_factory=dict)
    phase: str = COLLECTING
    clamped: list = field(default_factory=list)
    forwarded_agent: int | None = None
    forwarded_declaration: float | None = None
    plan: tuple = ()


class ClubCoordinator:
    """Executes the club protocol for one auction; single-owner mutable."""

    def __init__(self, club_id, invited, valuations, club_sizes, rng_seed=0):
        invited = tuple(invited)
        if len(invited) < 2:
            raise InvalidParameterError("a coordinator needs at least two invitees")
        kappa = getattr(club_sizes, "kappa", None)
        if kappa is not None and len(invited) > kappa:
            raise InvalidParameterError(
                f"club of {len(invited)} exceeds the maximum size {kappa}")
        self.valuations = valuations
        self.club_sizes = club_sizes
        self.rng = as_generator(rng_seed)
        self.state = ClubState(club_id=club_id, invited=invited)

    @property
    def size(self) -> int:
        return len(self.state.invited)

    def record_response(self, agent_id, message):
        """Store an invitee's declaration (clamped into support) or decline."""
        st = self.state
        if st.phase != COLLECTING:
            raise ProtocolOrderError("responses are closed")
        if agent_id not in st.invited:
            raise InvalidParameterError(f"agent {agent_id} was not invited")
        if message is DECLINE:
            st.responses[agent_id] = DECLINE
            return
        raw = float(message)
        lo, hi = self.valuations.support_lo, self.valuations.support_hi
        clamped = min(max(raw, lo), hi)
        if clamped != raw:
            st.clamped.append((agent_id, raw, clamped))
        st.responses[agent_id] = clamped

    def acceptors(self):
        return tuple(a for a in self.state.invited
                     if self.state.responses.get(a) is not DECLINE
                     and a in self.state.responses)

    def all_accepted(self) -> bool:
        return (len(self.state.responses) == self.size
                and all(self.state.responses[a] is not DECLINE
                        for a in self.state.invited))

    def planned_registrant_count(self) -> int:
        """Registrations this club will submit (before the announcement)."""
        self._require_complete()
        return 1 if self.all_accepted() else len(self.acceptors())

    def _require_complete(self):
        missing = [a for a in self.state.invited if a not in self.state.responses]
        if missing:
            raise ProtocolOrderError(f"missing responses from {missing}")

    def collect_and_register(self, announced_n):
        """Return the registration plan as ((agent_id, bid_amount), ...).

        All-accept: one registrant, the highest declarer, at the
        singleton-posterior bid.  Otherwise one registrant per acceptor
        at the size-k-posterior bid.  Declared-value ties are broken by
        the coordinator's seeded rng.
        """
        st = self.state
        if st.phase != COLLECTING:
            raise ProtocolOrderError("club already registered")
        self._require_complete()
        if announced_n < 2:
            raise InvalidParameterError("announced registrant count must be >= 2")
        k = self.size
        if self.all_accepted():
            decls = {a: st.responses[a] for a in st.invited}
            top = max(decls.values())
            tied = [a for a, d in decls.items() if d == top]
            h = tied[int(self.rng.integers(len(tied)))] if len(tied) > 1 else tied[0]
            counts = compose_count_distribution(announced_n, 1, self.club_sizes)
            bid = equilibrium_bid_mixture(top, counts, self.valuations)
            st.forwarded_agent = h
            st.forwarded_declaration = top
            st.plan = ((h, bid),)
        else:
            counts = compose_count_distribution(announced_n, k, self.club_sizes)
            st.plan = tuple(
                (a, equilibrium_bid_mixture(st.responses[a], counts, self.valuations))
                for a in self.acceptors())
        st.phase = REGISTERED
        return st.plan

    def settle(self, outcome, announced_n) -> Settlement:
        """Split the winning member's total payment between center and club.

        On the all-accept path a winning forwarded agent pays the
        singleton-posterior bid to the center and the gap up to the
        size-k-posterior bid to the coordinator; any other outcome (club
        lost, or the club had disbanded) settles with zero coordinator
        revenue.
        """
        st = self.state
        if st.phase == COLLECTING:
            raise ProtocolOrderError("settle called before registration")
        if st.phase == SETTLED:
            raise ProtocolOrderError("club already settled")
        if outcome is None:
            raise ProtocolOrderError("settle called before the auction outcome")
        st.phase = SETTLED
        if self.all_accepted():
            h = st.forwarded_agent
            if outcome.winner != h:
                return Settlement(0.0, 0.0, None)
            mu = st.forwarded_declaration
            p1 = equilibrium_bid_mixture(
                mu, compose_count_distribution(announced_n, 1, self.club_sizes),
                self.valuations)
            pk = equilibrium_bid_mixture(
                mu, compose_count_distribution(announced_n, self.size, self.club_sizes),
                self.valuations)
            return Settlement(p1, pk - p1, h)
        winners = [a for a, _ in st.plan if a == outcome.winner]
        if winners:
            return Settlement(outcome.transfers_to_center[winners[0]], 0.0, winners[0])
        return Settlement(0.0, 0.0, None)


@dataclass(frozen=True)
class FalseNameEstimate:
    deviation_utility: float
    equilibrium_utility: float
    gain: float
    gain_stderr: float
    best_action: float
    trials: int


def false_name_deviation_scenario(deviator_value, club_size,
                                  config: EnvironmentConfig,
                                  trials=200_000, rng_seed=0,
                                  bid_grid_size=257) -> FalseNameEstimate:
    """Estimate the payoff of joining a club with a throwaway declaration
    while bidding in the main auction under a second identity.

    Only available when identity enforcement is disabled; with
    enforcement the deviation is detectable and the mechanism blocks the
    direct channel.  The deviator's low declaration makes the club
    forward its best other member, and the extra registration raises the
    announced count by one.  The returned gain compares the best fixed
    grid bid against the truthful in-club strategy on common random
    numbers.
    """
    if config.identity_enforcement:
        raise ScenarioUnavailableError(
            "false-name bidding requires identity_enforcement=false")
    k = int(club_size)
    if k < 2:
        raise InvalidParameterError("the deviator must be in a club of size >= 2")
    v = float(deviator_value)
    F = config.valuations
    trials = int(trials)

    rng = spawned(rng_seed, 0) if isinstance(rng_seed, int) else as_generator(rng_seed)
    gains = np.empty(trials)
    u_eq_all = np.empty(trials)
    u_dev_all = np.empty(trials)
    best_actions = {}
    grid = np.linspace(F.support_lo, F.support_hi, int(bid_grid_size))
    start = 0
    for n_c, p in config.coordinator_counts.as_pairs():
        block = int(round(trials * p))
        if n_c == config.coordinator_counts.as_pairs()[-1][0]:
            block = trials - start
        if block <= 0:
            continue
        sl = slice(start, start + block)
        start += block
        dense = sample_dense(config, block, rng, forced_slot_sizes={0: k},
                             n_override=n_c)
        slot_max = dense.slot_max()
        mates = np.where(np.arange(dense.values.shape[2])[None, :] < k - 1,
                         dense.values[:, 0, :], -np.inf).max(axis=1)
        others = np.where(np.arange(slot_max.shape[1])[None, :] >= 1,
                          slot_max, -np.inf).max(axis=1)
        x = np.maximum(mates, others)

        pk = BidFunction(F, compose_count_distribution(n_c, k, config.club_sizes))
        u_eq = np.where(v > x, v - pk(v), 0.0)

        # deviation: announced count becomes n_c + 1; every other bid in the
        # main auction is the singleton-posterior bid at that announcement
        b1 = BidFunction(F, compose_count_distribution(n_c + 1, 1, config.club_sizes))
        opposing = b1.many(x)
        best = None
        for a in grid:
            u_dev = np.where(a > opposing, v - a, 0.0)
            mean = u_dev.mean()
            if best is None or mean > best[0]:
                best = (mean, a, u_dev)
        best_actions[n_c] = best[1]
        u_eq_all[sl] = u_eq
        u_dev_all[sl] = best[2]
        gains[sl] = best[2] - u_eq
    se = float(gains.std(ddof=1) / np.sqrt(trials))
    return FalseNameEstimate(
        deviation_utility=float(u_dev_all.mean()),
        equilibrium_utility=float(u_eq_all.mean()),
        gain=float(gains.mean()),
        gain_stderr=se,
        best_action=float(np.mean(list(best_actions.values()))),
        trials=trials)
