import numpy as np
import pytest

from sharprem.grid import build_box_domain
from sharprem.fields import euclidean
from sharprem.eigensolve import analytic_box_ground_state, ground_state


@pytest.fixture(scope="session")
def interval_257():
    return build_box_domain(0.0, 1.0, 257)


@pytest.fixture(scope="session")
def interval_513():
    return build_box_domain(0.0, 1.0, 513)


@pytest.fixture(scope="session")
def analytic_pair_257(interval_257):
    return analytic_box_ground_state(interval_257)


@pytest.fixture(scope="session")
def fd_pair_513(interval_513):
    return ground_state(interval_513, euclidean(1))


@pytest.fixture(scope="session")
def fd_pairs_1d():
    """Ground states on the 65/129/257 interval sweep, solved once."""
    pairs = {}
    for n in (65, 129, 257):
        d = build_box_domain(0.0, 1.0, n)
        pairs[n] = (d, ground_state(d, euclidean(1)))
    return pairs


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
