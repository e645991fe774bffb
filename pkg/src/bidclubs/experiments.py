"""Verification experiments: equilibrium deviations, welfare comparisons,
utility equivalence, and revenue accounting.

Every experiment is deterministic given (config, seed): trial blocks draw
from child streams keyed by (master seed, structured index), scenario
comparisons share draws (common random numbers) and the reports embed a
config digest, the seed and a pairing digest of the shared arrays.

Monte Carlo pass thresholds are three standard errors of the paired
per-trial differences; exact bid-level checks run on the scalar
quadrature path and demand margins above 1e-9.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from bidclubs import club_protocol
from bidclubs._kernel import kernel_backend
from bidclubs.bid_engine import BidFunction, equilibrium_bid_mixture
from bidclubs.distributions import compose_count_distribution
from bidclubs.environment import (AuctionInstance, EnvironmentConfig,
                                  config_digest, sample_dense, sample_instance)
from bidclubs.errors import InvalidParameterError
from bidclubs.mechanisms import Bid, run_first_price
from bidclubs.rngutil import spawned

EXACT_BID_TOL = 1e-9
SE_FACTOR = 3.0
CHUNK = 1 << 18

SINGLETON = "singleton"
CLUB_MEMBER = "club-member"


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------

@dataclass
class ReportRow:
    scenario: str
    statistic: str
    mean: float
    stderr: float
    passed: bool


@dataclass
class ExperimentReport:
    name: str
    config_digest: str
    seed: int
    trials: int
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and all(r.passed for r in self.rows)

    def add(self, scenario, statistic, mean, stderr, passed):
        self.rows.append(ReportRow(scenario, statistic, float(mean), float(stderr), bool(passed)))

    def violation(self, message):
        self.violations.append(message)

    def to_text(self) -> str:
        lines = [
            f"experiment = {self.name}",
            f"config = {self.config_digest}",
            f"seed = {self.seed}",
            f"trials = {self.trials}",
            f"backend = {kernel_backend()}",
            f"status = {'pass' if self.passed else 'fail'}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        lines += [f"violation: {v}" for v in self.violations]
        lines.append("")
        lines.append("scenario,statistic,mean,stderr,pass")
        for r in self.rows:
            lines.append(f"{r.scenario},{r.statistic},{_fmt(r.mean)},{_fmt(r.stderr)},"
                         f"{'true' if r.passed else 'false'}")
        lines.append("")
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _digest_arrays(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# shared sampling machinery
# ---------------------------------------------------------------------------

def _group_sizes(counts, total):
    # deterministic proportional allocation of trials to announced counts
    pairs = counts.as_pairs()
    sizes = [int(round(total * p)) for _, p in pairs]
    sizes[-1] = total - sum(sizes[:-1])
    return [(int(c), s) for (c, _), s in zip(pairs, sizes) if s > 0]


def _focal_draws(config, block, rng, n_c, focal_size, extra_slots=None):
    """Draw `block` instances with the focal agent in slot 0 of forced size.

    Returns (v, mates_max, others_max): the focal slot-0 member-0 value,
    the best value among the focal's club mates, and the best member
    value over the remaining slots (forced sizes for chosen slot indices
    may be supplied through extra_slots).
    """
    forced = {0: focal_size}
    forced.update(extra_slots or {})
    out_v, out_c, out_o = [], [], []
    done = 0
    while done < block:
        step = min(CHUNK, block - done)
        dense = sample_dense(config, step, rng, forced_slot_sizes=forced,
                             n_override=n_c)
        member = np.arange(dense.values.shape[2])
        mates = np.where((member[None, :] >= 1) & (member[None, :] < focal_size),
                         dense.values[:, 0, :], -np.inf).max(axis=1)
        slot_max = dense.slot_max()
        others = np.where(np.arange(slot_max.shape[1])[None, :] >= 1,
                          slot_max, -np.inf).max(axis=1)
        out_v.append(dense.values[:, 0, 0].copy())
        out_c.append(mates)
        out_o.append(others)
        done += step
    return (np.concatenate(out_v), np.concatenate(out_c), np.concatenate(out_o))


class _BidCache:
    """BidFunctions for posterior count models, cached per (n, k)."""

    def __init__(self, config):
        self.config = config
        self._cache = {}

    def mix(self, n, k) -> BidFunction:
        key = (int(n), int(k))
        fn = self._cache.get(key)
        if fn is None:
            counts = compose_count_distribution(n, k, self.config.club_sizes)
            fn = BidFunction(self.config.valuations, counts)
            self._cache[key] = fn
        return fn


def _paired_sweep(thresholds, margins, opposing, u_presc):
    """Gain statistics of grid actions against a prescribed-utility baseline.

    Action i wins the trials where ``opposing`` is strictly below
    ``thresholds[i]`` and then earns ``margins[i]``; the baseline earns
    ``u_presc`` on the same trials.  Returns per-action (gain, stderr of
    the paired difference, win rate), computed exactly from a sort and
    prefix sums rather than a per-action pass over the trials.
    """
    t = u_presc.size
    order = np.argsort(opposing, kind="stable")
    sorted_opp = opposing[order]
    sorted_u = u_presc[order]
    prefix = np.concatenate([[0.0], np.cumsum(sorted_u)])
    mean_p = float(sorted_u.mean())
    mean_p2 = float((sorted_u ** 2).mean())
    idx = np.searchsorted(sorted_opp, thresholds, side="left")
    win = idx / t
    sum_u_won = prefix[idx] / t
    gain = margins * win - mean_p
    second = margins ** 2 * win - 2.0 * margins * sum_u_won + mean_p2
    var = np.maximum(second - gain ** 2, 0.0)
    se = np.sqrt(var / t)
    return gain, se, win


def _flag_gains(report, scenario, family, actions, gain, se, extra=""):
    i = int(np.argmax(gain))
    z_ok = gain[i] <= SE_FACTOR * se[i] or se[i] == 0.0
    report.add(scenario, f"best-{family}-gain", gain[i], se[i], z_ok)
    if not z_ok:
        report.violation(
            f"{scenario}: {family} {actions[i]:.6g} gains {gain[i]:.3e} "
            f"({gain[i] / se[i]:.1f} SE){extra}")


# ---------------------------------------------------------------------------
# equilibrium deviation experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviatorSpec:
    """Which agent deviates: role, club size (members), focal value grid."""
    role: str = SINGLETON
    club_size: int = 2
    value_grid: tuple = ()


def default_value_grid(config, points=9):
    lo, hi = config.valuations.support_lo, config.valuations.support_hi
    return tuple(lo + (hi - lo) * (i / (points + 1)) for i in range(1, points + 1))


def verify_equilibrium(config: EnvironmentConfig, deviator: DeviatorSpec,
                       trials: int, rng_seed: int,
                       bid_grid_size: int = 256,
                       misreport_grid_size: int = 64) -> ExperimentReport:
    """Deviation search around the prescribed club-auction strategies.

    For every focal value and every announced registrant count, the focal
    agent's prescribed play is compared against grids of deviations on
    common random draws: raw main-auction bids for singletons; declared
    misreports, the decline option (followed by a best grid bid) and,
    when identity enforcement is off, false-name double bidding for club
    members.  A deviation whose paired gain exceeds three standard
    errors is reported as a violation.
    """
    if trials < 10_000:
        raise InvalidParameterError("equilibrium verification needs trials >= 10000")
    if deviator.role not in (SINGLETON, CLUB_MEMBER):
        raise InvalidParameterError(f"unknown deviator role {deviator.role!r}")
    k = int(deviator.club_size)
    if deviator.role == CLUB_MEMBER and k < 2:
        raise InvalidParameterError("club-member deviator needs club_size >= 2")

    values = deviator.value_grid or default_value_grid(config)
    report = ExperimentReport("equilibrium", config_digest(config), rng_seed, trials)
    report.notes.append(f"deviator = {deviator.role} (club size {k})")
    bids = _BidCache(config)
    lo, hi = config.valuations.support_lo, config.valuations.support_hi
    bid_grid = np.linspace(lo, hi, bid_grid_size)

    for vi, v in enumerate(values):
        rng = spawned(rng_seed, vi)
        for n_c, block in _group_sizes(config.coordinator_counts, trials):
            scenario = f"v={v:g}/n={n_c}"
            focal_size = 1 if deviator.role == SINGLETON else k
            _, mates, others = _focal_draws(config, block, rng, n_c, focal_size)
            report.notes.append(
                f"pairing {scenario} = {_digest_arrays(mates, others)}")

            if deviator.role == SINGLETON:
                pay = bids.mix(n_c, 1)(v)
                u_p = np.where(v > others, v - pay, 0.0)
                report.add(scenario, "prescribed-utility", u_p.mean(),
                           u_p.std(ddof=1) / np.sqrt(block), True)
                # deviations: arbitrary own bid against the common bid map
                opposing = bids.mix(n_c, 1).many(others)
                gain, se, _ = _paired_sweep(bid_grid, v - bid_grid, opposing, u_p)
                _flag_gains(report, scenario, "bid", bid_grid, gain, se)
                continue

            # club member: prescribed is truthful declaration
            x = np.maximum(mates, others)
            pay = bids.mix(n_c, k)(v)
            u_p = np.where(v > x, v - pay, 0.0)
            report.add(scenario, "prescribed-utility", u_p.mean(),
                       u_p.std(ddof=1) / np.sqrt(block), True)

            # misreport grid: forwarded only above the mates, charged at the
            # size-k posterior for the declared value
            mis = np.unique(np.concatenate([np.linspace(lo, hi, misreport_grid_size), [v]]))
            mis_pay = np.array([bids.mix(n_c, k)(m) for m in mis])
            gain, se, _ = _paired_sweep(mis, v - mis_pay, x, u_p)
            _flag_gains(report, scenario, "misreport", mis, gain, se)

            # decline: the club registers the k-1 acceptors at the size-k
            # posterior for the new announcement, everyone else moves to the
            # singleton posterior, and the deviator bids freely
            n_post = n_c + k - 1
            opposing = np.maximum(bids.mix(n_post, 1).many(others),
                                  bids.mix(n_post, k).many(mates))
            gain, se, _ = _paired_sweep(bid_grid, v - bid_grid, opposing, u_p)
            _flag_gains(report, scenario, "decline", bid_grid, gain, se,
                        extra=" after declining")

            if not config.identity_enforcement:
                # false-name double bid: throwaway declaration, second
                # identity registers directly, announcement rises by one
                opposing = bids.mix(n_c + 1, 1).many(x)
                gain, se, _ = _paired_sweep(bid_grid, v - bid_grid, opposing, u_p)
                _flag_gains(report, scenario, "false-name", bid_grid, gain, se)

    return report


# ---------------------------------------------------------------------------
# welfare comparisons
# ---------------------------------------------------------------------------

def compare_club_vs_disbanded(config: EnvironmentConfig, k: int, trials: int,
                              rng_seed: int, value_grid_size: int = 50) -> ExperimentReport:
    """Member welfare: size-k club versus the same agents as singletons.

    Paired draws: the focal agent keeps the same value, mates and
    opposing slots in both scenarios; with the club the announcement is
    the slot count, without it the announcement rises by k-1 and every
    bid moves to the singleton posterior.  Also checks the exact strict
    bid inequality behind the comparison on a value grid.
    """
    if k < 2:
        raise InvalidParameterError("club size k must be >= 2")
    report = ExperimentReport("club-vs-disbanded", config_digest(config), rng_seed, trials)
    bids = _BidCache(config)
    diffs, pair_digests = [], []
    for n_c, block in _group_sizes(config.coordinator_counts, trials):
        rng = spawned(rng_seed, n_c)
        v, mates, others = _focal_draws(config, block, rng, n_c, k)
        pair_digests.append(_digest_arrays(v, mates, others))
        win = v > np.maximum(mates, others)
        u_club = np.where(win, v - bids.mix(n_c, k).many(v), 0.0)
        u_solo = np.where(win, v - bids.mix(n_c + k - 1, 1).many(v), 0.0)
        diffs.append(u_club - u_solo)
    report.notes.append("pairing club = " + "/".join(pair_digests))
    report.notes.append("pairing disbanded = " + "/".join(pair_digests))
    d = np.concatenate(diffs)
    se = d.std(ddof=1) / np.sqrt(d.size)
    ok = d.mean() > SE_FACTOR * se
    report.add("all", "club-minus-disbanded-utility", d.mean(), se, ok)
    if not ok:
        report.violation(f"club advantage not positive beyond {SE_FACTOR} SE")

    _exact_bid_gap_rows(report, config, bids,
                        lambda n: (bids.mix(n + k - 1, 1), bids.mix(n, k)),
                        f"disbanded-minus-club-bid(k={k})", value_grid_size)
    return report


def compare_nonmember_welfare(config: EnvironmentConfig, k: int, trials: int,
                              rng_seed: int, value_grid_size: int = 50) -> ExperimentReport:
    """Outsider welfare: a fixed singleton with a size-k club present
    versus the same k agents participating directly."""
    if k < 2:
        raise InvalidParameterError("club size k must be >= 2")
    report = ExperimentReport("nonmember-welfare", config_digest(config), rng_seed, trials)
    bids = _BidCache(config)
    diffs, pair_digests = [], []
    for n_c, block in _group_sizes(config.coordinator_counts, trials):
        rng = spawned(rng_seed, n_c)
        v, _, others = _focal_draws(config, block, rng, n_c, 1, extra_slots={1: k})
        pair_digests.append(_digest_arrays(v, others))
        win = v > others
        u_present = np.where(win, v - bids.mix(n_c, 1).many(v), 0.0)
        u_disband = np.where(win, v - bids.mix(n_c + k - 1, 1).many(v), 0.0)
        diffs.append(u_present - u_disband)
    report.notes.append("pairing club-present = " + "/".join(pair_digests))
    report.notes.append("pairing disbanded = " + "/".join(pair_digests))
    d = np.concatenate(diffs)
    se = d.std(ddof=1) / np.sqrt(d.size)
    ok = d.mean() > SE_FACTOR * se
    report.add("all", "present-minus-disbanded-utility", d.mean(), se, ok)
    if not ok:
        report.violation(f"nonmember advantage not positive beyond {SE_FACTOR} SE")

    _exact_bid_gap_rows(report, config, bids,
                        lambda n: (bids.mix(n + k - 1, 1), bids.mix(n, 1)),
                        f"disbanded-minus-present-bid(k={k})", value_grid_size)
    return report


def _exact_bid_gap_rows(report, config, bids, pair_for, label, grid_size):
    lo, hi = config.valuations.support_lo, config.valuations.support_hi
    grid = np.linspace(lo, hi, grid_size + 2)[1:-1]
    for n, _ in config.coordinator_counts.as_pairs():
        hi_fn, lo_fn = pair_for(int(n))
        margins = np.array([hi_fn(v) - lo_fn(v) for v in grid])
        ok = bool(np.all(margins > EXACT_BID_TOL))
        report.add(f"n={int(n)}", label, margins.min(), 0.0, ok)
        if not ok:
            report.violation(f"exact bid inequality fails at n={int(n)}: "
                             f"min margin {margins.min():.3e}")


# ---------------------------------------------------------------------------
# utility equivalence
# ---------------------------------------------------------------------------

def verify_utility_equivalence(config: EnvironmentConfig, k: int, n: int,
                               trials: int, rng_seed: int,
                               value_grid_size: int = 50,
                               buckets: int = 10) -> ExperimentReport:
    """Club participation versus the no-club stochastic baseline.

    Scenario one runs the focal agent through the club path (settlement
    splits the winner's payment between center and coordinator); scenario
    two pits the same agents against each other in a plain stochastic
    auction with the composed posterior count model and its mixture bid.
    Differences are reported per equal-probability value bucket.  The
    exact payment identity (settlement total equals the mixture bid) is
    checked through the coordinator protocol on a value grid.
    """
    if k < 1:
        raise InvalidParameterError("club size k must be >= 1")
    if n < 2:
        raise InvalidParameterError("announced count n must be >= 2")
    report = ExperimentReport("utility-equivalence", config_digest(config), rng_seed, trials)
    bids = _BidCache(config)
    rng = spawned(rng_seed, 0)
    focal_size = max(k, 1)
    v, mates, others = _focal_draws(config, trials, rng, n, focal_size)
    report.notes.append(f"pairing club = {_digest_arrays(v, mates, others)}")
    report.notes.append(f"pairing baseline = {_digest_arrays(v, mates, others)}")
    x = np.maximum(mates, others)
    win = v > x

    # club path: singleton-posterior transfer to the center plus the
    # coordinator's settlement gap
    main = bids.mix(n, 1).many(v)
    total = bids.mix(n, k).many(v) if k >= 2 else main
    coordinator_gap = total - main if k >= 2 else np.zeros_like(main)
    u_club = np.where(win, v - (main + coordinator_gap), 0.0)
    # baseline: everyone bids the mixture for the composed count model
    u_base = np.where(win, v - bids.mix(n, k).many(v), 0.0) if k >= 2 \
        else np.where(win, v - main, 0.0)

    d = u_club - u_base
    q = np.clip(np.asarray(config.valuations.cdf(v), dtype=float), 0.0, 1.0 - 1e-12)
    bucket = (q * buckets).astype(int)
    for b in range(buckets):
        sel = bucket == b
        size = int(sel.sum())
        if size == 0:
            report.add(f"bucket={b}", "utility-difference", 0.0, 0.0, True)
            continue
        mean = d[sel].mean()
        se = d[sel].std(ddof=1) / np.sqrt(size) if size > 1 else 0.0
        # identical structure on both sides leaves only float dust, so the
        # three-SE rule gets an absolute floor well below economic scale
        ok = abs(mean) <= max(SE_FACTOR * se, 1e-12)
        report.add(f"bucket={b}", "utility-difference", mean, se, ok)
        if not ok:
            report.violation(f"bucket {b}: |mean diff| {abs(mean):.3e} beyond 3 SE")

    _payment_identity_rows(report, config, k, n, value_grid_size)
    return report


def _payment_identity_rows(report, config, k, n, grid_size):
    # run the actual coordinator settlement for a winning truthful declarer
    lo, hi = config.valuations.support_lo, config.valuations.support_hi
    grid = np.linspace(lo, hi, grid_size + 2)[1:-1]
    if k < 2:
        report.add("payment-identity", "max-abs-error", 0.0, 0.0, True)
        return
    counts = compose_count_distribution(n, k, config.club_sizes)
    worst = 0.0
    for v in grid:
        coord = club_protocol.ClubCoordinator(
            0, tuple(range(k)), config.valuations, config.club_sizes, rng_seed=0)
        coord.record_response(0, float(v))
        for mate in range(1, k):
            coord.record_response(mate, lo)
        plan = coord.collect_and_register(n)
        outcome = run_first_price([Bid(a, b) for a, b in plan], rng_seed=0)
        settlement = coord.settle(outcome, n)
        total = settlement.main_auction_payment + settlement.coordinator_payment
        direct = equilibrium_bid_mixture(v, counts, config.valuations)
        worst = max(worst, abs(total - direct))
    ok = worst <= EXACT_BID_TOL
    report.add("payment-identity", "max-abs-error", worst, 0.0, ok)
    if not ok:
        report.violation(f"settlement total misses the mixture bid by {worst:.3e}")


# ---------------------------------------------------------------------------
# revenue accounting
# ---------------------------------------------------------------------------

def revenue_accounting(config: EnvironmentConfig, trials: int,
                       rng_seed: int) -> ExperimentReport:
    """Coordinator and seller revenue over unconditioned instances.

    Coordinator revenue must be nonnegative in every single trial (exact
    check) and positive on average once clubs of two or more members win
    with positive probability.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    report = ExperimentReport("revenue", config_digest(config), rng_seed, trials)
    bids = _BidCache(config)
    coord_all, seller_all = [], []
    club_win = 0
    min_coord = np.inf
    for n_c, block in _group_sizes(config.coordinator_counts, trials):
        rng = spawned(rng_seed, n_c)
        done = 0
        while done < block:
            step = min(CHUNK, block - done)
            done += step
            dense = sample_dense(config, step, rng, n_override=n_c)
            slot_max = dense.slot_max()
            w = slot_max.argmax(axis=1)
            rows = np.arange(step)
            x_w = slot_max[rows, w]
            s_w = dense.sizes[rows, w]
            seller = bids.mix(n_c, 1).many(x_w)
            coord = np.zeros(step)
            for s in np.unique(s_w):
                if s >= 2:
                    sel = s_w == s
                    coord[sel] = bids.mix(n_c, int(s)).many(x_w[sel]) - seller[sel]
            club_win += int((s_w >= 2).sum())
            min_coord = min(min_coord, float(coord.min()))
            coord_all.append(coord)
            seller_all.append(seller)
    coord = np.concatenate(coord_all)
    seller = np.concatenate(seller_all)

    nonneg = min_coord >= 0.0
    report.add("all", "min-coordinator-revenue", min_coord, 0.0, nonneg)
    if not nonneg:
        report.violation(f"negative coordinator revenue observed: {min_coord:.3e}")
    se = coord.std(ddof=1) / np.sqrt(coord.size)
    clubs_possible = any(c >= 2 and p > 0 for c, p in config.club_sizes.as_pairs())
    positive = coord.mean() > SE_FACTOR * se if clubs_possible else True
    report.add("all", "mean-coordinator-revenue", coord.mean(), se, positive)
    if not positive:
        report.violation("coordinator revenue not positive beyond 3 SE")
    report.add("all", "mean-seller-revenue", seller.mean(),
               seller.std(ddof=1) / np.sqrt(seller.size), True)
    report.add("all", "mean-total-revenue", (coord + seller).mean(),
               (coord + seller).std(ddof=1) / np.sqrt(coord.size), True)
    report.add("all", "club-win-rate", club_win / trials, 0.0, True)
    return report


# ---------------------------------------------------------------------------
# object-level audit trail
# ---------------------------------------------------------------------------

@dataclass
class TrialRecord:
    """One fully materialized trial of the equilibrium play, for audits."""

    instance: AuctionInstance
    actions: dict              # agent_id -> declaration (or main-auction bid)
    outcome: object
    utilities: dict            # agent_id -> realized utility
    coordinator_revenues: dict  # club_id -> revenue
    seller_revenue: float

    def to_jsonable(self) -> dict:
        return {
            "n_potential_coordinators": self.instance.n_potential_coordinators,
            "clubs": [[cid, list(members)] for cid, members in self.instance.clubs],
            "agents": {str(a): [t.value, t.signal] for a, t in self.instance.agents.items()},
            "actions": {str(a): v for a, v in self.actions.items()},
            "winner": self.outcome.winner,
            "transfers_to_center": {str(a): x for a, x in self.outcome.transfers_to_center.items()},
            "transfers_to_coordinator": {str(a): x for a, x in
                                         self.outcome.transfers_to_coordinator.items()},
            "utilities": {str(a): u for a, u in self.utilities.items()},
            "coordinator_revenues": {str(c): r for c, r in self.coordinator_revenues.items()},
            "seller_revenue": self.seller_revenue,
        }


def record_trials(config: EnvironmentConfig, n_trials: int, rng_seed: int):
    """Run the full object-level protocol for a small number of trials.

    All agents play the prescribed strategies (truthful declarations in
    clubs, singleton-posterior bids outside).  This is the slow audit
    path; the vectorized experiments must agree with it draw for draw.
    """
    records = []
    for t in range(int(n_trials)):
        rng = spawned(rng_seed, t)
        instance = sample_instance(config, rng)
        records.append(play_instance(config, instance, rng))
    return records


def play_instance(config: EnvironmentConfig, instance: AuctionInstance, rng) -> TrialRecord:
    """Prescribed-strategy play of one instance through the real protocol."""
    coordinators = {}
    singleton_bidders = []
    actions = {}
    for club_id, members in instance.clubs:
        if len(members) >= 2:
            coord = club_protocol.ClubCoordinator(
                club_id, members, config.valuations, config.club_sizes,
                rng_seed=rng)
            for a in members:
                declaration = instance.agents[a].value
                coord.record_response(a, declaration)
                actions[a] = declaration
            coordinators[club_id] = coord
        else:
            singleton_bidders.append(members[0])

    announced = (sum(c.planned_registrant_count() for c in coordinators.values())
                 + len(singleton_bidders))
    plans = {cid: c.collect_and_register(announced) for cid, c in coordinators.items()}
    bids = [Bid(a, amount) for plan in plans.values() for a, amount in plan]
    singleton_counts = compose_count_distribution(announced, 1, config.club_sizes)
    for a in singleton_bidders:
        amount = equilibrium_bid_mixture(
            instance.agents[a].value, singleton_counts, config.valuations)
        actions[a] = amount
        bids.append(Bid(a, amount))

    outcome = run_first_price(bids, rng)
    coordinator_revenues = {}
    for cid, coord in coordinators.items():
        settlement = coord.settle(outcome, announced)
        coordinator_revenues[cid] = settlement.coordinator_payment
        if settlement.paying_agent is not None:
            outcome.transfers_to_coordinator[settlement.paying_agent] = \
                settlement.coordinator_payment

    utilities = {a: 0.0 for a in instance.agents}
    if outcome.winner is not None:
        w = outcome.winner
        utilities[w] = instance.agents[w].value - outcome.payment_of(w)
    seller = outcome.transfers_to_center.get(outcome.winner, 0.0)
    return TrialRecord(instance, actions, outcome, utilities,
                       coordinator_revenues, seller)
