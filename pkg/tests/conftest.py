import numpy as np
import pytest

from qmarginal.scenario import JointContext, MarginalScenario


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pair_scenario():
    return MarginalScenario(JointContext(("A", "B"), (2, 2)), (("A",), ("B",)))


@pytest.fixture
def chain_scenario():
    return MarginalScenario(
        JointContext(("A", "B", "C"), (2, 2, 2)), (("A", "B"), ("B", "C"))
    )


@pytest.fixture
def triple_scenario():
    return MarginalScenario(
        JointContext(("A", "B", "C"), (2, 2, 2)),
        (("A", "B"), ("A", "C"), ("B", "C")),
    )


def random_density(rng, d, rank=None):
    """Haar-ish random density matrix of dimension d (full rank by default)."""
    r = rank or d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
