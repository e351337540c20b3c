import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from cppf import (
    GroundComposition,
    OutputWindow,
    Polarization,
    RefractivityField,
    Scenario,
    SourceSpec,
    TerrainProfile,
)

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

PEC = GroundComposition(0.0, 0, 1.0, math.inf)


def make_scenario(
    frequency=2800.0,
    antenna_height=15.0,
    polarization=Polarization.HORIZONTAL,
    min_height=0.0,
    max_height=100.0,
    max_range=10.0,
    n_heights=50,
    n_ranges=20,
    refractivity=None,
    terrain_points=(),
    antenna=None,
):
    return Scenario(
        SourceSpec(frequency, antenna_height, polarization, antenna),
        OutputWindow(min_height, max_height, max_range, n_heights, n_ranges),
        refractivity=refractivity or RefractivityField.uniform(0.0),
        terrain=TerrainProfile(tuple(terrain_points), (PEC,)),
    )


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# Acceptance results are collected here and echoed after the run so the
# pass/fail table is visible even when pytest captures output.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
