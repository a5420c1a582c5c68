import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from octl import ModelConfig, build_model

HALF = ((0.0, math.pi / 2),)


@pytest.fixture(scope="session")
def single():
    """One mode, control region (0, pi/2): b = 1/2, lambda = 1, T = 1."""
    return build_model(ModelConfig(num_modes=1, omega=HALF))


@pytest.fixture(scope="session")
def pair():
    return build_model(ModelConfig(num_modes=2, omega=HALF))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
