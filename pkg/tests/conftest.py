import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from magdirac.fields import FieldProfile, radial_gauge
from magdirac.radial_solver import RadialGrid

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# pass/fail lines from the acceptance suite, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid2000():
    return RadialGrid(12.0, 2000)


@pytest.fixture(scope="session")
def grid400():
    return RadialGrid(12.0, 400)


@pytest.fixture(scope="session")
def zero_gauge2000(grid2000):
    return radial_gauge(FieldProfile.zero(1.0), grid2000.r)


@pytest.fixture(scope="session")
def well_gauge2000(grid2000):
    return radial_gauge(FieldProfile.step_well(1.0, -0.5, 2.0), grid2000.r)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
