import acceptance_report
import numpy as np
import pytest

from oldroyd_toy.models import State, StressField, VelocityField
from oldroyd_toy.spectral import SpectralField, leray_project, make_grid, to_spectral


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid32():
    return make_grid(32, 32)


def random_field(grid, rng, decay=None, scale=1.0):
    """Random real field; ``decay`` damps mode k by ``exp(-decay*|k|^2)``."""
    f = to_spectral(grid, rng.standard_normal(grid.shape))
    if decay is not None:
        f = SpectralField(grid, f.coeffs * np.exp(-decay * grid.ksq))
    return scale * f


def random_state(grid, rng, decay=0.05, scale=1.0, t=0.0):
    v1, v2 = leray_project(
        random_field(grid, rng, decay, scale), random_field(grid, rng, decay, scale)
    )
    t1, t2 = (
        random_field(grid, rng, decay, scale),
        random_field(grid, rng, decay, scale),
    )
    return State(VelocityField(v1, v2), StressField(t1, t2), t)


_started_criteria: set[int] = set()


def pytest_runtest_logstart(nodeid, location):
    name = nodeid.split("::")[-1]
    if "test_acceptance.py::" in nodeid and name.startswith("test_criterion_"):
        _started_criteria.add(int(name.split("_")[2]))


def pytest_terminal_summary(terminalreporter):
    out = acceptance_report.lines(_started_criteria)
    if out:
        terminalreporter.section("acceptance criteria")
        for line in out:
            terminalreporter.write_line(line)
