import numpy as np
import pytest

from udwrates import DetectorParams, derive_dimensionless, params_from_dimensionless


@pytest.fixture
def set_a():
    """sigma = 5e-8 s, a = 1 GHz, delta = 4e8 Hz, lambda = 0.363."""
    return derive_dimensionless(
        DetectorParams(a=1.0e9, sigma=5.0e-8, delta=4.0e8, lam=0.363)
    )


@pytest.fixture
def set_b():
    """sigma = 12e-8 s, a = 0.2 GHz, delta = 5.5e7 Hz, lambda = 0.581."""
    return derive_dimensionless(
        DetectorParams(a=0.2e9, sigma=12.0e-8, delta=5.5e7, lam=0.581)
    )


@pytest.fixture
def set_bprime():
    """a*sigma = 98, sigma*delta = 30, lambda = 0.581."""
    return params_from_dimensionless(98.0, 30.0, 0.0, 0.581)


@pytest.fixture
def set_mild():
    """Moderate suppression point where every element is quadrature-accessible."""
    return params_from_dimensionless(10.0, 1.0, 0.0, 0.5)


def random_xstate(rng: np.random.Generator):
    """A random valid X-state (unit trace, PSD)."""
    from udwrates.state import XState

    while True:
        pops = rng.dirichlet(np.ones(4))
        a1, b1, a2, b2 = pops
        r1 = np.sqrt(a1 * b1) * rng.uniform(0.0, 1.0)
        r2 = np.sqrt(a2 * b2) * rng.uniform(0.0, 1.0)
        p1, p2 = rng.uniform(0, 2 * np.pi, size=2)
        s = XState(a1=a1, b1=b1, a2=a2, b2=b2,
                   c1=r1 * np.exp(1j * p1), c2=r2 * np.exp(1j * p2))
        return s
