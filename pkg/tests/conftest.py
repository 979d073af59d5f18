import pytest

from cara_wealth.market import InvestorParams, MarketParams


@pytest.fixture
def market():
    # r = 1%, mu = 3%, sigma = 10%, T = 20: theta = 0.2
    return MarketParams(r=0.01, mu=0.03, sigma=0.1, T=20.0)


@pytest.fixture
def volatile_market():
    return MarketParams(r=0.01, mu=0.03, sigma=0.2, T=20.0)


@pytest.fixture
def investor():
    return InvestorParams(alpha=1e-4, x0=1000.0)
