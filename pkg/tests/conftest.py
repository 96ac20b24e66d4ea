import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


# Ten-node example network (0-based ids): node 0 is the root with five
# children 1..5; node 1 has children 6, 7; node 3 has child 8; node 5 has child 9.
# Degrees: node 0 -> 5, node 1 -> 3, nodes 3 and 5 -> 2, the rest 1.
FIGURE_ANCESTORS = [-1, 0, 0, 0, 0, 0, 1, 1, 3, 5]


@pytest.fixture
def figure_ancestors():
    return list(FIGURE_ANCESTORS)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_criterion(key: str, passed: bool, text: str) -> None:
    ACCEPTANCE_LINES[key] = f"{'PASS' if passed else 'FAIL'} criterion {key}: {text}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head = key.split("-")[0]
        return (int(head) if head.isdigit() else 99, key)

    for key in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
