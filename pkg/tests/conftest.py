import numpy as np
import pytest

from topola.netcore import figs9_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def figs9():
    A, index = figs9_graph()
    return A, index


def random_orthonormal(rng, n, k):
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return Q


def with_spectrum(rng, n, m, sigma):
    """Random n x m matrix with prescribed singular values."""
    sigma = np.asarray(sigma, dtype=float)
    k = sigma.size
    return (random_orthonormal(rng, n, k) * sigma) @ random_orthonormal(rng, m, k).T


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[0][1:])):
            terminalreporter.write_line(line)
