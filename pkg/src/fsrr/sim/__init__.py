from .config import CbrSession, ConfigError, ScenarioConfig, config_from_dict, load_config
from .engine import METRIC_FIELDS, Metrics, RunResult, Simulation, run, run_full

__all__ = [
    "CbrSession",
    "ConfigError",
    "METRIC_FIELDS",
    "Metrics",
    "RunResult",
    "ScenarioConfig",
    "Simulation",
    "config_from_dict",
    "load_config",
    "run",
    "run_full",
]
