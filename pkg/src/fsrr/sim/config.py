"""Scenario configuration, validation and TOML loading."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

MOBILITY_MODELS = ("random_waypoint", "random_walk")
SCHEDULERS = ("fcfs", "fsrr")
FORWARDING = ("flood", "dec_directional")
# per_packet: every CBR packet starts a discovery; on_break: only when the cached route broke
DISCOVERY = ("per_packet", "on_break")


class ConfigError(ValueError):
    """Invalid scenario; ``fields`` names every offending key."""

    def __init__(self, problems: dict[str, str]):
        self.fields = sorted(problems)
        self.problems = problems
        msg = "; ".join(f"{k}: {v}" for k, v in sorted(problems.items()))
        super().__init__(msg)


@dataclass(frozen=True)
class CbrSession:
    source: int
    dest: int
    start: float
    rate: float  # packets per second; see ScenarioConfig.discovery for what a packet triggers
    stop: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    area_w: float = 500.0
    area_h: float = 500.0
    node_count: int = 20
    v_max_per_node: float = 25.0
    tx_range: float = 50.0
    tau: float = 3.0
    v_s: float = 30.0
    sim_time: float = 1000.0
    mobility: str = "random_waypoint"
    scheduler: str = "fsrr"
    forwarding: str = "dec_directional"
    discovery: str = "per_packet"
    traffic: tuple[CbrSession, ...] = ()
    # extra CBR sessions between random node pairs, as a fraction of node_count
    session_fraction: float = 0.0
    cbr_rate: float = 0.25
    rng_seed: int = 1
    service_time: float = 0.1
    # extra router busy time per transmitted copy (0 gives a fixed service time)
    per_copy_time: float = 0.05
    hop_latency: float = 0.01
    hello_interval: float = 1.0
    timestep: float = 0.1
    walk_epoch: float = 5.0
    # fixed positions (x, y) for every node; disables the random initial placement
    initial_positions: tuple[tuple[float, float], ...] = ()
    run_id: str = ""

    @property
    def area_diagonal(self) -> float:
        return math.hypot(self.area_w, self.area_h)

    @property
    def variant(self) -> str:
        return f"{self.scheduler}+{self.forwarding}"

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "ScenarioConfig":
        problems: dict[str, str] = {}
        for name in ("area_w", "area_h", "tx_range", "tau", "v_s", "sim_time",
                     "service_time", "hop_latency", "hello_interval", "timestep",
                     "walk_epoch", "cbr_rate"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                problems[name] = f"must be a positive number, got {value!r}"
        if not isinstance(self.per_copy_time, (int, float)) or not (self.per_copy_time >= 0):
            problems["per_copy_time"] = f"must be >= 0, got {self.per_copy_time!r}"
        if not isinstance(self.v_max_per_node, (int, float)) or not (self.v_max_per_node >= 0):
            problems["v_max_per_node"] = f"must be >= 0, got {self.v_max_per_node!r}"
        if not isinstance(self.node_count, int) or self.node_count < 2:
            problems["node_count"] = f"must be an integer >= 2, got {self.node_count!r}"
        if not isinstance(self.session_fraction, (int, float)) or self.session_fraction < 0:
            problems["session_fraction"] = "must be >= 0"
        if not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2**64:
            problems["rng_seed"] = "must be an unsigned 64-bit integer"
        if self.mobility not in MOBILITY_MODELS:
            problems["mobility"] = f"must be one of {MOBILITY_MODELS}"
        if self.scheduler not in SCHEDULERS:
            problems["scheduler"] = f"must be one of {SCHEDULERS}"
        if self.forwarding not in FORWARDING:
            problems["forwarding"] = f"must be one of {FORWARDING}"
        if self.discovery not in DISCOVERY:
            problems["discovery"] = f"must be one of {DISCOVERY}"
        if "timestep" not in problems and "hello_interval" not in problems:
            if self.timestep > self.hello_interval:
                problems["timestep"] = "must not exceed hello_interval"
        n = self.node_count if isinstance(self.node_count, int) else 0
        for k, s in enumerate(self.traffic):
            key = f"traffic[{k}]"
            if not (0 <= s.source < n and 0 <= s.dest < n):
                problems[key] = "source/dest out of range"
            elif s.source == s.dest:
                problems[key] = "source equals dest"
            elif s.rate <= 0 or s.start < 0:
                problems[key] = "rate must be > 0 and start >= 0"
        if self.initial_positions:
            if len(self.initial_positions) != n:
                problems["initial_positions"] = "needs one (x, y) pair per node"
            elif any(not (0 <= x <= self.area_w and 0 <= y <= self.area_h)
                     for x, y in self.initial_positions):
                problems["initial_positions"] = "positions must lie inside the area"
        if problems:
            raise ConfigError(problems)
        return self


# keys a scenario file must spell out; everything else has a documented default
REQUIRED_FIELDS = ("node_count", "area_w", "area_h", "tx_range", "sim_time")

_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_FLOAT_FIELDS = {n for n, f in _FIELDS.items() if f.type == "float"}


def config_from_dict(
    data: dict[str, Any], require: bool = False, **overrides: Any
) -> ScenarioConfig:
    data = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    problems: dict[str, str] = {k: "unknown field" for k in set(data) - set(_FIELDS)}
    if require:
        problems.update({k: "required field missing" for k in REQUIRED_FIELDS if k not in data})
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in _FIELDS:
            continue
        if key == "traffic":
            try:
                value = tuple(CbrSession(**s) for s in value)
            except TypeError as exc:
                problems["traffic"] = str(exc)
                continue
        elif key == "initial_positions":
            value = tuple((float(x), float(y)) for x, y in value)
        elif key in _FLOAT_FIELDS and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        kwargs[key] = value
    try:
        config = ScenarioConfig(**kwargs).validate()
    except ConfigError as exc:
        problems.update(exc.problems)
    if problems:
        raise ConfigError(problems)
    return config


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    out = dataclasses.asdict(config)
    out["traffic"] = [dataclasses.asdict(s) for s in config.traffic]
    out["initial_positions"] = [list(p) for p in config.initial_positions]
    return out


def load_toml(path: str | Path) -> dict[str, Any]:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_config(path: str | Path, **overrides: Any) -> ScenarioConfig:
    return config_from_dict(load_toml(path), require=True, **overrides)
