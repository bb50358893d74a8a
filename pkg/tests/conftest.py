import numpy as np
import pytest

from selftrig import reactor
from selftrig.certify import compute_certificate

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def plant():
    return reactor.plant()


@pytest.fixture(scope="session")
def cert(plant):
    return compute_certificate(plant.A_cl, reactor.GAMMA)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def schur_stable(rng, n, lo=0.3, hi=0.95):
    """Random square matrix rescaled to a spectral radius in ``[lo, hi]``."""
    a = rng.uniform(-1, 1, (n, n))
    rho = max(abs(np.linalg.eigvals(a)))
    return a * rng.uniform(lo, hi) / rho


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
