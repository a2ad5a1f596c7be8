"""Bundled scenario library (JSON files shipped with the package)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .config import ScenarioConfig, load_config


def scenario_dir() -> Path:
    return Path(str(resources.files("tpslab") / "scenarios"))


def list_scenarios() -> list[str]:
    return sorted(p.stem for p in scenario_dir().glob("*.json"))


def load_scenario(name: str) -> ScenarioConfig:
    path = scenario_dir() / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return load_config(path)


def resolve(ref: str) -> ScenarioConfig:
    """A config path, or the name of a bundled scenario."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        return load_config(path)
    return load_scenario(ref)
