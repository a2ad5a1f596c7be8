from .config import ScenarioConfig, load_config, parse_config
from .engine import RunRecord, evaluate, run_scenario, sweep, validate
from .scenarios import list_scenarios, load_scenario

__all__ = [
    "RunRecord",
    "ScenarioConfig",
    "evaluate",
    "list_scenarios",
    "load_config",
    "load_scenario",
    "parse_config",
    "run_scenario",
    "sweep",
    "validate",
]
