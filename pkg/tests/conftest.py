import pytest

from market.params import MarketParams
from solvers.dual import build_surface
from utility.specs import UtilitySpec


@pytest.fixture(scope="session")
def market():
    """r = 0.05, mu = 0.10, sigma = 0.2, so theta = 0.25."""
    return MarketParams(r=0.05, mu=0.10, sigma=0.2)


@pytest.fixture(scope="session")
def power_surface(market):
    return build_surface(market, UtilitySpec.power(0.5))


@pytest.fixture(scope="session")
def capped_surface(market):
    return build_surface(market, UtilitySpec.capped_linear(1.0))


@pytest.fixture(scope="session")
def piecewise_surface(market):
    return build_surface(market, UtilitySpec.piecewise_power(1.0, 0.5))


@pytest.fixture(scope="session")
def quartic_surface(market):
    return build_surface(market, UtilitySpec.inverse_quartic())


@pytest.fixture(scope="session")
def exponential_surface(market):
    return build_surface(market, UtilitySpec.shifted_exponential())
