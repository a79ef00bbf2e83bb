import numpy as np
import pytest

from prismhiggs.rings import PrimeConfig, make_base_ring

# one unramified and one ramified Eisenstein polynomial per prime
CONFIGS = [
    PrimeConfig(2, 8, (-2, 1)),
    PrimeConfig(2, 8, (2, 2, 1)),
    PrimeConfig(3, 6, (-3, 1)),
    PrimeConfig(3, 6, (-3, 0, 1)),
    PrimeConfig(5, 6, (-5, 1)),
    PrimeConfig(5, 6, (-5, 0, 1)),
]

_RINGS = {}


def ring_for(cfg: PrimeConfig):
    if cfg not in _RINGS:
        _RINGS[cfg] = make_base_ring(cfg)
    return _RINGS[cfg]


@pytest.fixture(params=CONFIGS, ids=lambda c: f"p{c.p}e{c.e}")
def any_ring(request):
    return ring_for(request.param)


@pytest.fixture
def R2():
    return ring_for(CONFIGS[0])


@pytest.fixture
def R3():
    return ring_for(CONFIGS[2])


@pytest.fixture
def R3r():
    return ring_for(CONFIGS[3])


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
