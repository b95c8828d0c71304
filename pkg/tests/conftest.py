import numpy as np
import pytest


def E(i, j, d=3):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> summary line, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
