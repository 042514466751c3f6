import numpy as np
import pytest

from spinequiv.equivalence import cartan_partner
from spinequiv.network import build

THREE_SITE = dict(
    spins=["1/2", "1/2", "1"],
    exchange={(1, 2): 1.0, (1, 3): 0.4, (2, 3): 0.7},
    gyros=[1.0, 2.3, -0.6],
)


def random_state(N, rng, p=0.05):
    """Pseudo-pure state weak enough that its Cartan partner stays positive."""
    psi = rng.normal(size=N) + 1j * rng.normal(size=N)
    psi /= np.linalg.norm(psi)
    return (1 - p) * np.eye(N) / N + p * np.outer(psi, psi.conj())


@pytest.fixture(scope="session")
def three_site():
    return build(**THREE_SITE, rho0={"preset": "pseudo-pure", "p": 0.08, "seed": 3})


@pytest.fixture(scope="session")
def three_site_partner(three_site):
    return cartan_partner(three_site)


@pytest.fixture(scope="session")
def pair_model():
    return build(["1/2", "1/2"], {(1, 2): 1.3}, [1.0, -0.4], {"preset": "pseudo-pure", "p": 0.2, "seed": 1})


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
