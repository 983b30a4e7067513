import pytest

from helpers import make_topology

from sdncc.params import EnergyParams


@pytest.fixture
def params():
    return EnergyParams()


@pytest.fixture
def line3():
    """0 - 1 - 2 with node 1 as the only server."""
    return make_topology(3, [(0, 1), (1, 2)], caching=[1], computing=[1], gateway=0)


@pytest.fixture
def ring8():
    return make_topology(8, [(i, (i + 1) % 8) for i in range(8)])
