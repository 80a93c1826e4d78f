import pytest

from bacon_shor_ft.bounds import GadgetConfig, Locality
from bacon_shor_ft.noise import NoiseParams


@pytest.fixture
def biased_noise():
    return NoiseParams.from_bias(1e-4, 1e4)


@pytest.fixture
def zero_noise():
    return NoiseParams.zero()


@pytest.fixture
def small_cfg():
    return GadgetConfig(n=1, m=3, p=3, r=1, r_prime=1, r_plus=1)


@pytest.fixture
def unit_cfg():
    return GadgetConfig(n=1, m=1, p=1, r=1, r_prime=1, r_plus=1)


@pytest.fixture
def distance_cfg():
    return GadgetConfig(n=3, m=3, p=3, r=3, r_prime=2, r_plus=2)


@pytest.fixture
def local_cfg():
    return GadgetConfig(n=1, m=3, p=9, r=1, r_prime=1, r_plus=1, locality=Locality.LOCAL)
