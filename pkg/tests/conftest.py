import numpy as np
import pytest

from solarkd.dataio import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cube_data():
    """400 rows uniform on [-1, 1]^5 with a smooth nonlinear target."""
    r = np.random.default_rng(7)
    X = r.uniform(-1, 1, (400, 5))
    y = 0.4 * X[:, 0] - 0.3 * np.tanh(2 * X[:, 3]) + 0.1 * X[:, 1] * X[:, 2]
    return Dataset(X, y)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
