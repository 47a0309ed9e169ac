import numpy as np
import pytest

from dicke_dce import SystemParams


@pytest.fixture
def ref_params():
    """g = 0.45 with omega_a = omega_0 = 1, lambda = gamma0 = 0.005."""
    return SystemParams(omega_a=1.0, omega_0=1.0, lam=0.005, gamma0=0.005, g=0.45, eta=0.63)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
