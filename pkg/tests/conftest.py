import math

import numpy as np
import pytest

from excursion_credit.paths import BrownianPath, make_grid

# distress trigger 0.2 for this alpha
HAND_ALPHA = math.sqrt(0.4)


@pytest.fixture
def hand_path():
    """Positive bump, zero at 0.2, steady fall to -1 at 0.4, then to -2 at 0.55.

    Distress starts at 0.4 (age 0.2) at level -1; the doubled level -2 is
    reached at 0.55, which is default.
    """
    vals = np.array([0, .1, .1, .1, 0, -.25, -.5, -.75, -1, -4 / 3, -5 / 3, -2, -1.9])
    return BrownianPath(grid=make_grid(0.6, 0.05), values=vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
