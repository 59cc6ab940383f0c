import numpy as np
import pytest

from bhescape.randsrc import RngStream

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RngStream(20240601, 0)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)


def random_complex(nprng, shape, norm=1.0):
    a = nprng.standard_normal(shape) + 1j * nprng.standard_normal(shape)
    return norm * a / np.linalg.norm(a)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
