import numpy as np
import pytest
from hypothesis import settings

from fraclod.geometry import build_geological_network, build_localized_network, constants_for
from fraclod.problem import Problem

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def loc_net():
    return build_localized_network(4)


@pytest.fixture(scope="session")
def loc(loc_net):
    return Problem(loc_net, constants_for(loc_net, 1.0))


@pytest.fixture(scope="session")
def geo_net():
    return build_geological_network(4, seed=0)


@pytest.fixture(scope="session")
def geo(geo_net):
    return Problem(geo_net, constants_for(geo_net, 1.0, n_lines=500))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
