"""Economic-environment sampling for auctions with bidding clubs.

An instance is drawn in three independent stages: the number of
potential coordinators (registrant slots), the club size behind each
slot, and iid private values for every member.  A slot of size one is a
plain singleton bidder; each agent's signal is its own club size, which
together with the announced registrant count pins down its posterior
over the total number of bidders.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from bidclubs.distributions import (ClubSizeDistribution, CountDistribution,
                                    ValuationDistribution,
                                    compose_count_distribution, require_min_two)
from bidclubs.errors import InvalidParameterError
from bidclubs.rngutil import as_generator


@dataclass(frozen=True)
class EnvironmentConfig:
    coordinator_counts: CountDistribution
    club_sizes: ClubSizeDistribution
    valuations: ValuationDistribution
    identity_enforcement: bool = True

    def __post_init__(self):
        require_min_two(self.coordinator_counts, "coordinator count distribution")

    @property
    def kappa(self) -> int:
        return self.club_sizes.kappa


class AgentType(NamedTuple):
    value: float
    signal: int | None  # own club size; None for the no-club baseline


@dataclass(frozen=True)
class AuctionInstance:
    clubs: tuple  # ((club_id, (agent_id, ...)), ...)
    agents: dict  # agent_id -> AgentType
    n_potential_coordinators: int

    @property
    def total_agents(self) -> int:
        return len(self.agents)

    def club_of(self, agent_id) -> int:
        for club_id, members in self.clubs:
            if agent_id in members:
                return club_id
        raise KeyError(agent_id)


def sample_instance(config: EnvironmentConfig, rng_seed) -> AuctionInstance:
    """Draw one complete instance: slot count, club sizes, values, signals."""
    rng = as_generator(rng_seed)
    n_c = _draw_counts(config.coordinator_counts, 1, rng)[0]
    sizes = _draw_counts(config.club_sizes, n_c, rng)
    clubs = []
    agents = {}
    next_id = 0
    for club_id, size in enumerate(sizes):
        members = tuple(range(next_id, next_id + size))
        next_id += size
        vals = config.valuations.inverse_cdf(rng.random(size))
        for agent_id, v in zip(members, np.atleast_1d(vals)):
            agents[agent_id] = AgentType(float(v), int(size))
        clubs.append((club_id, members))
    return AuctionInstance(tuple(clubs), agents, int(n_c))


def baseline_stochastic_instance(count_model: CountDistribution,
                                 valuations: ValuationDistribution,
                                 rng_seed) -> AuctionInstance:
    """Instance for the no-club baseline: n singleton agents, null signals."""
    require_min_two(count_model)
    rng = as_generator(rng_seed)
    n = _draw_counts(count_model, 1, rng)[0]
    vals = np.atleast_1d(valuations.inverse_cdf(rng.random(n)))
    clubs = tuple((i, (i,)) for i in range(n))
    agents = {i: AgentType(float(vals[i]), None) for i in range(n)}
    return AuctionInstance(clubs, agents, int(n))


def belief_distribution(instance_view, config: EnvironmentConfig) -> CountDistribution:
    """Posterior over the total bidder count given (announced n, own signal)."""
    n_announced, own_signal = instance_view
    if n_announced < 2:
        raise InvalidParameterError("announced registrant count must be >= 2")
    if not 1 <= own_signal <= config.kappa:
        raise InvalidParameterError(
            f"signal must lie in [1, kappa={config.kappa}], got {own_signal}")
    return compose_count_distribution(n_announced, own_signal, config.club_sizes)


def _draw_counts(dist: CountDistribution, size, rng) -> np.ndarray:
    counts = np.array([c for c, _ in dist.as_pairs()])
    probs = dist.as_array()
    probs = probs / probs.sum()
    return rng.choice(counts, size=size, p=probs)


# ---------------------------------------------------------------------------
# dense (vectorized) sampling for the Monte Carlo experiments
# ---------------------------------------------------------------------------

@dataclass
class DenseSample:
    """Trial-parallel draws: slot counts, per-slot sizes, per-member values.

    ``values`` is (trials, slots, kappa); entries beyond a slot's size or
    beyond a trial's slot count are drawn but masked by ``sizes``.
    Keeping the draw layout independent of the sizes is what makes
    common-random-number pairing across scenarios exact.
    """

    n_slots: np.ndarray
    sizes: np.ndarray
    values: np.ndarray

    def member_mask(self) -> np.ndarray:
        member = np.arange(self.values.shape[2])
        return member[None, None, :] < self.sizes[:, :, None]

    def slot_max(self) -> np.ndarray:
        """Highest member value per slot; -inf for empty slots."""
        masked = np.where(self.member_mask(), self.values, -np.inf)
        return masked.max(axis=2)


def sample_dense(config: EnvironmentConfig, trials, rng,
                 forced_slot_sizes=None, n_override=None,
                 extra_members=0) -> DenseSample:
    """Vectorized environment draw for ``trials`` independent instances.

    ``forced_slot_sizes`` pins chosen slot indices to fixed club sizes
    (interim conditioning on a focal agent's signal); ``n_override``
    fixes the slot count instead of drawing it; ``extra_members`` widens
    the member axis beyond kappa when a forced size exceeds it.
    """
    rng = as_generator(rng)
    trials = int(trials)
    forced = dict(forced_slot_sizes or {})
    if n_override is None:
        n = _draw_counts(config.coordinator_counts, trials, rng)
    else:
        n = np.full(trials, int(n_override))
    max_slots = int(n.max())
    if forced and max(forced) >= max_slots:
        raise InvalidParameterError("forced slot index beyond the slot count")
    sizes = _draw_counts(config.club_sizes, (trials, max_slots), rng)
    sizes = np.where(np.arange(max_slots)[None, :] < n[:, None], sizes, 0)
    for slot, size in forced.items():
        sizes[:, slot] = int(size)
    width = max(config.kappa, *(list(forced.values()) or [0])) + int(extra_members)
    u = rng.random((trials, max_slots, width))
    values = np.asarray(config.valuations.inverse_cdf(u), dtype=np.float64)
    return DenseSample(n_slots=n, sizes=sizes, values=values)


def instances_from_dense(dense: DenseSample):
    """Materialize object-level instances from a dense draw (audit path)."""
    for t in range(dense.n_slots.shape[0]):
        clubs = []
        agents = {}
        next_id = 0
        for s in range(int(dense.n_slots[t])):
            size = int(dense.sizes[t, s])
            members = tuple(range(next_id, next_id + size))
            next_id += size
            for m, agent_id in enumerate(members):
                agents[agent_id] = AgentType(float(dense.values[t, s, m]), size)
            clubs.append((s, members))
        yield AuctionInstance(tuple(clubs), agents, int(dense.n_slots[t]))


# ---------------------------------------------------------------------------
# reproducibility helpers
# ---------------------------------------------------------------------------

def canonical_environment_text(config: EnvironmentConfig) -> str:
    lines = [
        f"valuations = {config.valuations.name}",
        f"support = {config.valuations.support_lo!r} {config.valuations.support_hi!r}",
        f"identity_enforcement = {str(config.identity_enforcement).lower()}",
        f"kappa = {config.kappa}",
        "[gamma_C]",
    ]
    lines += [f"{c} {p!r}" for c, p in config.coordinator_counts.as_pairs()]
    lines.append("[gamma_A]")
    lines += [f"{c} {p!r}" for c, p in config.club_sizes.as_pairs()]
    return "\n".join(lines)


def config_digest(config: EnvironmentConfig) -> str:
    text = canonical_environment_text(config)
    return hashlib.sha256(text.encode()).hexdigest()[:16]
