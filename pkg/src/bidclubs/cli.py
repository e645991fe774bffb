"""Configuration loading, experiment dispatch and deterministic reporting.

Config files are flat text: ``key = value`` scalars plus pmf sections of
``count probability`` line pairs::

    experiment = revenue
    trials = 100000
    seed = 7
    valuations = uniform        # or: power 2.0
    kappa = 2
    identity_enforcement = true

    [gamma_C]
    2 0.5
    3 0.5

    [gamma_A]
    1 0.5
    2 0.5

Reports are a human-readable header followed by a machine-readable
comma-separated table (scenario, statistic, mean, stderr, pass); the same
config and seed always produce byte-identical report bodies.

Exit codes: 0 all checks passed, 1 violations found, 2 configuration or
usage error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from bidclubs import experiments
from bidclubs.bid_engine import BidFunction
from bidclubs.distributions import (ClubSizeDistribution, CountDistribution,
                                    ValuationDistribution,
                                    compose_count_distribution, dominates,
                                    power_valuations, uniform_valuations)
from bidclubs.environment import EnvironmentConfig
from bidclubs.errors import ConfigError, InvalidParameterError
from bidclubs.experiments import DeviatorSpec, ExperimentReport

EXPERIMENTS = ("equilibrium", "club-vs-disbanded", "nonmember-welfare",
               "utility-equivalence", "revenue", "dominance-check", "bid-table")

_DEFAULT_VALUE_GRID = {"equilibrium": 9, "bid-table": 101}


@dataclass
class RunConfig:
    experiment: str | None = None
    trials: int = 100_000
    seed: int = 0
    output: str | None = None
    value_grid: int | None = None
    valuations: ValuationDistribution = field(default_factory=uniform_valuations)
    gamma_c: CountDistribution | None = None
    gamma_a: ClubSizeDistribution | None = None
    identity_enforcement: bool = True
    deviator_role: str = experiments.SINGLETON
    deviator_club_size: int = 2
    club_size: int = 2
    announced_n: int = 2
    bid_grid: int = 256
    misreport_grid: int = 64
    fixed_counts: tuple = (2, 3, 4, 5)
    grid_n_max: int = 6

    def environment(self) -> EnvironmentConfig:
        if self.gamma_c is None or self.gamma_a is None:
            raise ConfigError("this experiment needs [gamma_C] and [gamma_A] sections")
        return EnvironmentConfig(
            coordinator_counts=self.gamma_c,
            club_sizes=self.gamma_a,
            valuations=self.valuations,
            identity_enforcement=self.identity_enforcement)

    def grid_points(self) -> int:
        if self.value_grid is not None:
            return self.value_grid
        return _DEFAULT_VALUE_GRID.get(self.experiment, 50)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "experiment", "trials", "seed", "output", "value_grid", "valuations",
    "kappa", "identity_enforcement", "deviator_role", "deviator_club_size",
    "club_size", "announced_n", "bid_grid", "misreport_grid", "fixed_counts",
    "grid_n_max",
}


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(raw)


def parse_config(text: str) -> RunConfig:
    scalars: dict = {}
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in ("gamma_C", "gamma_A"):
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            current = sections.setdefault(name, [])
            continue
        if current is not None and "=" not in line:
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError("pmf lines must be 'count probability'", line=lineno)
            try:
                current.append((int(parts[0]), float(parts[1]), lineno))
            except ValueError as exc:
                raise ConfigError(f"bad pmf entry: {exc}", line=lineno) from exc
            continue
        current = None
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCALAR_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        scalars[key] = (value.strip(), lineno)
    return _build_config(scalars, sections)


def _scalar(scalars, key, cast, default):
    if key not in scalars:
        return default
    value, lineno = scalars[key]
    try:
        return cast(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}", line=lineno) from exc


def _parse_bool(value):
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    raise ValueError(f"expected true or false, got {value!r}")


def _parse_valuations(value):
    parts = value.split()
    if parts[0] == "uniform" and len(parts) == 1:
        return uniform_valuations()
    if parts[0] == "power" and len(parts) == 2:
        return power_valuations(float(parts[1]))
    raise ValueError(f"expected 'uniform' or 'power ALPHA', got {value!r}")


def _build_config(scalars, sections) -> RunConfig:
    cfg = RunConfig()
    cfg.experiment = _scalar(scalars, "experiment", str, None)
    if cfg.experiment is not None and cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; "
                          f"choose from {', '.join(EXPERIMENTS)}",
                          line=scalars["experiment"][1])
    cfg.trials = _scalar(scalars, "trials", int, cfg.trials)
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1", line=scalars["trials"][1])
    cfg.seed = _scalar(scalars, "seed", int, cfg.seed)
    cfg.output = _scalar(scalars, "output", str, None)
    cfg.value_grid = _scalar(scalars, "value_grid", int, None)
    cfg.valuations = _scalar(scalars, "valuations", _parse_valuations, cfg.valuations)
    cfg.identity_enforcement = _scalar(scalars, "identity_enforcement",
                                       _parse_bool, True)
    cfg.deviator_role = _scalar(scalars, "deviator_role", str, cfg.deviator_role)
    cfg.deviator_club_size = _scalar(scalars, "deviator_club_size", int,
                                     cfg.deviator_club_size)
    cfg.club_size = _scalar(scalars, "club_size", int, cfg.club_size)
    cfg.announced_n = _scalar(scalars, "announced_n", int, cfg.announced_n)
    cfg.bid_grid = _scalar(scalars, "bid_grid", int, cfg.bid_grid)
    cfg.misreport_grid = _scalar(scalars, "misreport_grid", int, cfg.misreport_grid)
    cfg.fixed_counts = _scalar(
        scalars, "fixed_counts",
        lambda v: tuple(int(x) for x in v.split()), cfg.fixed_counts)
    cfg.grid_n_max = _scalar(scalars, "grid_n_max", int, cfg.grid_n_max)

    if "gamma_C" in sections:
        pairs = [(c, p) for c, p, _ in sections["gamma_C"]]
        first_line = sections["gamma_C"][0][2]
        try:
            gamma_c = CountDistribution.from_pairs(pairs)
            if gamma_c.min_count < 2:
                raise InvalidParameterError(
                    "gamma_C must put zero mass on counts 0 and 1")
            cfg.gamma_c = gamma_c
        except InvalidParameterError as exc:
            raise ConfigError(f"gamma_C: {exc}", line=first_line) from exc
    if "gamma_A" in sections:
        pairs = [(c, p) for c, p, _ in sections["gamma_A"]]
        first_line = sections["gamma_A"][0][2]
        counts = sorted(c for c, _ in pairs)
        kappa = _scalar(scalars, "kappa", int, max(max(counts), 2))
        try:
            base = CountDistribution.from_pairs(pairs)
            cfg.gamma_a = ClubSizeDistribution(base.min_count, base.probs, kappa=kappa)
        except InvalidParameterError as exc:
            raise ConfigError(f"gamma_A: {exc}", line=first_line) from exc
    return cfg


# ---------------------------------------------------------------------------
# experiment dispatch
# ---------------------------------------------------------------------------

def run(config: RunConfig) -> int:
    """Execute the configured experiment and write its report.

    Returns the process exit code: 0 when every check passed, 1 when the
    report contains violations.  Configuration problems raise
    ConfigError; the command-line wrapper maps them to exit code 2 and
    I/O errors to 3.
    """
    if config.experiment is None:
        raise ConfigError("no experiment selected")
    if config.experiment == "bid-table":
        path = config.output or "bid_table.csv"
        rows = export_bid_table(config.valuations, _table_models(config),
                                np.linspace(config.valuations.support_lo,
                                            config.valuations.support_hi,
                                            config.grid_points()),
                                path)
        print(f"bid-table: wrote {rows} rows to {path}")
        return 0

    report = _dispatch(config)
    text = report.to_text()
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        destination = config.output
    else:
        sys.stdout.write(text)
        destination = "stdout"
    status = "pass" if report.passed else "fail"
    print(f"{report.name}: {status} ({len(report.violations)} violations) -> {destination}")
    return 0 if report.passed else 1


def _dispatch(config: RunConfig) -> ExperimentReport:
    name = config.experiment
    if name == "equilibrium":
        spec = DeviatorSpec(
            role=config.deviator_role,
            club_size=config.deviator_club_size,
            value_grid=experiments.default_value_grid(
                config.environment(), config.grid_points()))
        return experiments.verify_equilibrium(
            config.environment(), spec, config.trials, config.seed,
            bid_grid_size=config.bid_grid,
            misreport_grid_size=config.misreport_grid)
    if name == "club-vs-disbanded":
        return experiments.compare_club_vs_disbanded(
            config.environment(), config.club_size, config.trials, config.seed,
            value_grid_size=config.grid_points())
    if name == "nonmember-welfare":
        return experiments.compare_nonmember_welfare(
            config.environment(), config.club_size, config.trials, config.seed,
            value_grid_size=config.grid_points())
    if name == "utility-equivalence":
        return experiments.verify_utility_equivalence(
            config.environment(), config.club_size, config.announced_n,
            config.trials, config.seed, value_grid_size=config.grid_points())
    if name == "revenue":
        return experiments.revenue_accounting(
            config.environment(), config.trials, config.seed)
    if name == "dominance-check":
        return _dominance_check(config)
    raise ConfigError(f"unknown experiment {name!r}")


def _dominance_check(config: RunConfig) -> ExperimentReport:
    """Exact tail-order checks plus bid monotonicity over composed models."""
    from bidclubs.bid_engine import verify_dominance_monotonicity

    if config.gamma_a is None:
        raise ConfigError("dominance-check needs a [gamma_A] section")
    gamma = config.gamma_a
    report = ExperimentReport("dominance-check", "-", config.seed, 0)
    lo, hi = config.valuations.support_lo, config.valuations.support_hi
    v_grid = np.linspace(lo, hi, config.grid_points() + 2)[1:-1]
    pairs = []
    for n in range(2, config.grid_n_max + 1):
        for k in range(2, gamma.kappa + 1):
            p_hi = compose_count_distribution(n + k - 1, 1, gamma)
            p_lo = compose_count_distribution(n, k, gamma)
            ok = dominates(p_hi, p_lo)
            report.add(f"n={n}/k={k}", "tail-dominance", 1.0 if ok else 0.0, 0.0, ok)
            if ok:
                pairs.append((p_lo, p_hi))
            else:
                report.violation(f"no tail dominance at n={n}, k={k}")
    violations = verify_dominance_monotonicity(config.valuations, pairs, v_grid)
    report.add("all", "bid-monotonicity-violations", float(len(violations)), 0.0,
               not violations)
    for v in violations:
        report.violation(f"bid monotonicity fails for pair {v.pair_index} at v={v.v:g}")
    return report


def _table_models(config: RunConfig):
    models = [(f"n={n}", BidFunction(config.valuations, n))
              for n in config.fixed_counts]
    return models


def export_bid_table(valuations, models, value_grid, path) -> int:
    """Write one ``v,model,bid`` row per grid value and count model.

    Bids are serialized at 12 significant digits; the row count is
    returned.  ``models`` is an iterable of (name, BidFunction).
    """
    lines = ["v,model,bid"]
    for name, fn in models:
        for v in value_grid:
            lines.append(f"{_fmt(v)},{name},{_fmt(fn(float(v)))}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(lines) - 1


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bidclubs",
        description="first-price bidding-club experiments and exports")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--trials", type=int, default=None, help="override the trial count")
        p.add_argument("--out", default=None, help="report / table output path")
    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        config.experiment = args.experiment
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.trials is not None:
            config = replace(config, trials=args.trials)
        if args.out is not None:
            config = replace(config, output=args.out)
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
