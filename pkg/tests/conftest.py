"""Shared fixtures: scenario paths and a session-wide run cache so each
full-horizon simulation is computed exactly once."""

from __future__ import annotations

from pathlib import Path

import pytest

from uuvsim import Variant, load_scenario
from uuvsim import engine

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = REPO / "scenarios"


@pytest.fixture(scope="session")
def sv_path() -> Path:
    return SCENARIOS / "paper_sv.toml"


@pytest.fixture(scope="session")
def sv_disturbed_path() -> Path:
    return SCENARIOS / "paper_sv_disturbed.toml"


@pytest.fixture(scope="session")
def sv_scenario(sv_path):
    return load_scenario(sv_path)


@pytest.fixture(scope="session")
def sv_disturbed_scenario(sv_disturbed_path):
    return load_scenario(sv_disturbed_path)


class RunCache:
    """Lazily runs (variant, disturbed) combinations of the shipped
    scenario once per test session."""

    def __init__(self, base, disturbed):
        self._scenarios = {False: base, True: disturbed}
        self._logs = {}

    def log(self, variant: Variant, disturbed: bool = False):
        key = (variant, disturbed)
        if key not in self._logs:
            scenario = self._scenarios[disturbed].with_overrides(controller=variant)
            self._logs[key] = engine.run(scenario)
        return self._logs[key]


@pytest.fixture(scope="session")
def runs(sv_scenario, sv_disturbed_scenario) -> RunCache:
    return RunCache(sv_scenario, sv_disturbed_scenario)
