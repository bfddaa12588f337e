"""Parameter sweeps over node count or top speed, with CSV output.

A sweep runs every (axis value, scheduler/forwarding variant, seed)
combination, then writes a long table with one row per run and an aggregate
table with the mean and 95% t-interval of the waiting-time metric per
(axis value, variant).
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from scipy import stats

from .sim.config import (
    FORWARDING,
    SCHEDULERS,
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    load_toml,
)
from .sim.engine import METRIC_FIELDS, Metrics, Simulation, per_node_wait_per_router

AXES = {"node_count": "node_count", "v_max": "v_max_per_node"}
LONG_FIELDS = ("axis", "axis_value", "variant", "seed") + METRIC_FIELDS
AGGREGATE_FIELDS = ("axis", "axis_value", "variant", "runs", "mean", "std", "ci95_low", "ci95_high")


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    axis: str
    values: tuple
    seeds: tuple[int, ...]
    variants: tuple[tuple[str, str], ...] = (("fsrr", "dec_directional"), ("fcfs", "dec_directional"))

    def validate(self) -> "SweepSpec":
        problems: dict[str, str] = {}
        if self.axis not in AXES:
            problems["axis"] = f"must be one of {sorted(AXES)}"
        if not self.values:
            problems["values"] = "must not be empty"
        if not self.seeds:
            problems["seeds"] = "must not be empty"
        for k, (sched, fwd) in enumerate(self.variants):
            if sched not in SCHEDULERS or fwd not in FORWARDING:
                problems[f"variants[{k}]"] = f"unknown variant {sched}+{fwd}"
        if problems:
            raise ConfigError(problems)
        for cfg in self.configs():
            cfg.validate()
        return self

    def configs(self) -> list[ScenarioConfig]:
        out = []
        for value in self.values:
            for sched, fwd in self.variants:
                for seed in self.seeds:
                    out.append(self.base.replace(**{
                        AXES[self.axis]: value,
                        "scheduler": sched,
                        "forwarding": fwd,
                        "rng_seed": seed,
                        "run_id": f"{self.axis}={value}/{sched}+{fwd}/seed={seed}",
                    }))
        return out


@dataclass(frozen=True)
class SweepRun:
    axis: str
    axis_value: Any
    variant: str
    seed: int
    metrics: Metrics
    digest: str
    # waiting-time metric rebuilt from the raw per-entry log
    recomputed_wait_metric: float

    def row(self) -> dict[str, Any]:
        out = {"axis": self.axis, "axis_value": self.axis_value, "variant": self.variant, "seed": self.seed}
        out.update({name: getattr(self.metrics, name) for name in METRIC_FIELDS})
        return out


def load_sweep(path: str | Path) -> SweepSpec:
    data = load_toml(path)
    missing = [k for k in ("base", "axis", "values", "seeds") if k not in data]
    if missing:
        raise ConfigError({k: "required field missing" for k in missing})
    base = config_from_dict(data["base"])
    variants = tuple(tuple(v) for v in data.get("variants", SweepSpec.variants))
    values = tuple(data["values"])
    if data["axis"] == "v_max":
        values = tuple(float(v) for v in values)
    return SweepSpec(base, data["axis"], values, tuple(data["seeds"]), variants).validate()


def _run_one(args: tuple[str, ScenarioConfig]) -> SweepRun:
    axis, cfg = args
    result = Simulation(cfg).run()
    routers = {w.router_id for w in result.wait_log}
    recomputed = per_node_wait_per_router(
        math.fsum(w.wait for w in result.wait_log), cfg.node_count, len(routers)
    )
    value = cfg.node_count if axis == "node_count" else cfg.v_max_per_node
    return SweepRun(axis, value, cfg.variant, cfg.rng_seed, result.metrics, result.digest, recomputed)


@dataclass
class SweepResult:
    runs: list[SweepRun] = field(default_factory=list)
    # (run_id, error message) for every run that raised
    failures: list[tuple[str, str]] = field(default_factory=list)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Run every configuration; runs come back sorted by (axis value, variant, seed)."""
    work = [(spec.axis, cfg) for cfg in spec.configs()]
    result = SweepResult()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [(cfg.run_id, pool.submit(_run_one, (axis, cfg))) for axis, cfg in work]
            outcomes = []
            for run_id, fut in futures:
                try:
                    outcomes.append((run_id, fut.result(), None))
                except Exception as exc:  # reported per run, sweep continues
                    outcomes.append((run_id, None, exc))
    else:
        outcomes = []
        for axis, cfg in work:
            try:
                outcomes.append((cfg.run_id, _run_one((axis, cfg)), None))
            except Exception as exc:
                outcomes.append((cfg.run_id, None, exc))
    for run_id, run, exc in outcomes:
        if exc is None:
            result.runs.append(run)
        else:
            result.failures.append((run_id, f"{type(exc).__name__}: {exc}"))
    result.runs.sort(key=lambda r: (r.axis_value, r.variant, r.seed))
    return result


def t_interval(values: Sequence[float], level: float = 0.95) -> tuple[float, float, float, float]:
    """Mean, sample std and a two-sided Student-t confidence interval."""
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0, mean, mean
    sd = statistics.stdev(values)
    half = float(stats.t.ppf(0.5 + level / 2, n - 1) * sd / math.sqrt(n))
    return mean, sd, mean - half, mean + half


def aggregate(runs: Iterable[SweepRun]) -> list[dict[str, Any]]:
    groups: dict[tuple, list[float]] = {}
    axis = None
    for r in runs:
        axis = r.axis
        groups.setdefault((r.axis_value, r.variant), []).append(r.metrics.per_node_wait_per_router)
    rows = []
    for (value, variant), vals in sorted(groups.items()):
        mean, sd, lo, hi = t_interval(vals)
        rows.append({
            "axis": axis, "axis_value": value, "variant": variant, "runs": len(vals),
            "mean": mean, "std": sd, "ci95_low": lo, "ci95_high": hi,
        })
    return rows


def _fmt(value: Any) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def to_csv(rows: Iterable[dict[str, Any]], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row[f]) for f in fields])
    return buf.getvalue()


def write_outputs(runs: list[SweepRun], out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    long_path = out_dir / "sweep_long.csv"
    agg_path = out_dir / "sweep_aggregate.csv"
    long_path.write_text(to_csv((r.row() for r in runs), LONG_FIELDS))
    agg_path.write_text(to_csv(aggregate(runs), AGGREGATE_FIELDS))
    return long_path, agg_path
