import numpy as np
import pytest

from selfsim.systems import euler_system, linear_test_system

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def euler():
    return euler_system()


@pytest.fixture(scope="session")
def linear():
    return linear_test_system()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
