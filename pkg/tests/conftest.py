import numpy as np
import pytest

from fmnc.metric import build_fnorm
from fmnc.space import make_space


@pytest.fixture
def line():
    """R with the single seminorm |x|."""
    return make_space("c-grid", 1, 1)


@pytest.fixture
def plane():
    """R^2 with the sup norm, so the gauge ball is the unit box."""
    return make_space("c-grid", 2, 1)


@pytest.fixture
def box_metric(plane):
    return build_fnorm(plane, "gauge")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    """Print the one-line verdict recorded by each acceptance criterion."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "criterion" and rep.when == "call":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
