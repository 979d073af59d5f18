import math

import numpy as np
import pytest

from cara_wealth.errors import DomainError, ParameterError
from cara_wealth.market import (
    GaussianStream,
    InvestorParams,
    MarketParams,
    bond_price,
    state_price_density,
    stock_step,
    utility,
)
from cara_wealth.simulation import shadow_path


def test_theta(market):
    assert market.theta == pytest.approx(0.2, rel=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(r=0.01, mu=0.03, sigma=0.0, T=20),
        dict(r=0.01, mu=0.03, sigma=-0.1, T=20),
        dict(r=0.01, mu=0.03, sigma=0.1, T=0),
        dict(r=0.03, mu=0.03, sigma=0.1, T=20),
        dict(r=0.05, mu=0.03, sigma=0.1, T=20),
    ],
)
def test_market_validation(kwargs):
    with pytest.raises(ParameterError):
        MarketParams(**kwargs)


def test_negative_rate_allowed():
    m = MarketParams(r=-0.01, mu=0.02, sigma=0.1, T=20)
    assert bond_price(m, 20) == pytest.approx(0.8187307530779818, rel=1e-14)


@pytest.mark.parametrize("alpha,x0", [(0, 1), (-1, 1), (1e-4, 0), (1e-4, -5)])
def test_investor_validation(alpha, x0):
    with pytest.raises(ParameterError):
        InvestorParams(alpha, x0)


def test_bond(market):
    assert bond_price(market, 0) == 1.0
    assert bond_price(market, 20) == pytest.approx(1.2214027581601699, rel=1e-14)
    for t in (-1e-3, 20.5):
        with pytest.raises(DomainError):
            bond_price(market, t)


def test_stock_step_examples(market):
    dt = 1.0
    dW = -(market.mu - 0.5 * market.sigma**2) * dt / market.sigma
    assert stock_step(market, 1.0, dt, dW) == pytest.approx(1.0, abs=1e-15)
    assert stock_step(market, 100.0, 1.0, 0.0) == pytest.approx(100 * math.exp(0.025), rel=1e-14)
    with pytest.raises(DomainError):
        stock_step(market, 0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        stock_step(market, 1.0, 0.0, 0.0)


def test_stock_mean_monte_carlo(market):
    n = 100_000
    z = GaussianStream(7, 0).normals(n)
    sT = stock_step(market, 1.0, market.T, math.sqrt(market.T) * z)
    se = sT.std(ddof=1) / math.sqrt(n)
    assert abs(sT.mean() - math.exp(market.mu * market.T)) < 3 * se


def test_discounted_stock_martingale_under_r(market):
    rn = MarketParams(r=0.01, mu=0.01 + 1e-12, sigma=0.1, T=20)
    n = 100_000
    z = GaussianStream(8, 0).normals(n)
    disc = math.exp(-rn.r * rn.T) * stock_step(rn, 1.0, rn.T, math.sqrt(rn.T) * z)
    assert abs(disc.mean() - 1.0) < 3 * disc.std(ddof=1) / math.sqrt(n)


def test_utility():
    assert utility(1e-4, 0.0) == -1.0
    assert utility(1e-4, 10_000.0) == pytest.approx(-math.exp(-1), rel=1e-15)
    x = np.linspace(-1e4, 1e5, 100)
    u = utility(1e-3, x)
    assert np.all(np.diff(u) > 0) and np.all(u < 0)
    assert np.all(np.diff(u, 2) < 0)
    assert -1e-12 < utility(1e-3, 3e4) < 0
    with pytest.raises(ParameterError):
        utility(0.0, 1.0)


def test_state_price_density(market):
    assert state_price_density(market, 0.0, 0.0) == 1.0
    assert state_price_density(market, 20.0, 0.0) == pytest.approx(math.exp(-0.6), rel=1e-14)
    assert np.all(state_price_density(market, 5.0, np.linspace(-50, 50, 11)) > 0)


def test_budget_constraint_monte_carlo(market, investor):
    # E[H_T X_T] = X0 for the unconstrained optimal wealth
    n = 100_000
    W = math.sqrt(market.T) * GaussianStream(9, 0).normals(n)
    xT = shadow_path(market, investor.alpha, investor.x0, np.array([market.T]), W[:, None])[:, 0]
    hx = state_price_density(market, market.T, W) * xT
    assert abs(hx.mean() - investor.x0) < 3 * hx.std(ddof=1) / math.sqrt(n)


def test_stream_determinism():
    a = GaussianStream(123, 4).normals(1000)
    b = GaussianStream(123, 4).normals(1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, GaussianStream(123, 5).normals(1000))
    assert not np.array_equal(a, GaussianStream(124, 4).normals(1000))
    # prefix stability: a shorter draw is a prefix of a longer one
    assert np.array_equal(GaussianStream(123, 4).normals(10), a[:10])
