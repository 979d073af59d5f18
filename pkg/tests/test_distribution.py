import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cara_wealth.distribution import TerminalLaw, quantile, quantile_shift, terminal_law
from cara_wealth.errors import DomainError, ParameterError
from cara_wealth.market import InvestorParams, MarketParams
from cara_wealth.normal import normal_cdf
from cara_wealth.shadow import resolve
from cara_wealth.strategies import Bounds, Scenario

P = (0.25, 0.5, 0.75, 0.95)


def law(market, kl=None, ku=None, x0=1000.0, alpha=1e-4):
    return terminal_law(resolve(Scenario(market, InvestorParams(alpha, x0), Bounds(kl, ku))))


def test_unconstrained_moments(market):
    L = law(market)
    assert L.mean == pytest.approx(9221.40, abs=0.01)
    assert L.sd == pytest.approx(8944.27, abs=0.01)
    assert quantile(L, 0.5) == pytest.approx(L.mean, rel=1e-15)


def test_base_market_quantile_rows(market):
    np.testing.assert_allclose(quantile(law(market), P), [3188.6, 9221.4, 15254.2, 23933.4], atol=0.5)
    np.testing.assert_allclose(quantile(law(market, 1000.0), P), [1000, 1000, 1000, 9641.3], atol=0.5)
    np.testing.assert_allclose(quantile(law(market, -1000.0), P), [-1000, 3875.2, 9908.0, 18587.2], atol=0.5)
    np.testing.assert_allclose(quantile(law(market, -30000.0), P), [3188.0, 9220.9, 15253.7, 23932.9], atol=0.5)


TABLE11 = {
    10: (209, 812, 1415, 2283),
    100: (319, 922, 1525, 2393),
    1000: (1418, 2021, 2625, 3493),
    10_000: (12411, 13014, 13617, 14485),
    100_000: (122337, 122940, 123544, 124411),
}


@pytest.mark.parametrize("x0", sorted(TABLE11))
def test_table11_theoretical(market, x0):
    np.testing.assert_allclose(quantile(law(market, x0=x0, alpha=1e-3), P), TABLE11[x0], atol=0.5)


def test_floor_mass_800(market):
    L = law(market, 800.0)
    # independent evaluation of Phi((K_l - mean)/sd) through erfc
    z = (800.0 - L.mean) / L.sd
    assert L.mass_lower == pytest.approx(0.5 * math.erfc(-z / math.sqrt(2)), rel=1e-14)
    assert L.mass_lower == pytest.approx(0.6515, abs=1e-4)
    assert L.mass_upper == 0.0


def test_cdf_shape():
    L = TerminalLaw(100.0, 50.0, 0.0, 200.0)
    assert L.cdf(-1e-9) == 0.0
    assert L.cdf(0.0) == pytest.approx(L.mass_lower)
    assert L.cdf(200.0) == 1.0
    assert L.cdf(150.0) == pytest.approx(normal_cdf(1.0))
    assert L.mass_upper == pytest.approx(normal_cdf(-2.0))
    assert L.support == (0.0, 200.0)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_quantile_clamped_and_monotone(p1, p2):
    L = TerminalLaw(100.0, 50.0, 40.0, 180.0)
    q1, q2 = quantile(L, p1), quantile(L, p2)
    assert 40.0 <= q1 <= 180.0
    if p1 <= p2:
        assert q1 <= q2
    interior = L.mass_lower < p1 < 1 - L.mass_upper
    assert interior == (40.0 < q1 < 180.0) or abs(p1 - L.mass_lower) < 1e-12 or abs(p1 - (1 - L.mass_upper)) < 1e-12
    # infimum definition: F(q) >= p, and F(z) < p just below q inside the support
    assert L.cdf(q1) >= p1 - 1e-12


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        quantile(TerminalLaw(0.0, 1.0), p)


def test_unresolved_rejected(market):
    sc = Scenario(market, InvestorParams(1e-4, 1000.0), Bounds(800.0))
    with pytest.raises(ParameterError):
        terminal_law(sc)


def _sc(m, kl=None, ku=None):
    return resolve(Scenario(m, InvestorParams(1e-4, 1000.0), Bounds(kl, ku)))


def test_quantile_shift_formula(volatile_market):
    m = volatile_market
    c, u = _sc(m, 0.0, 4000.0), _sc(m)
    expected = (c.shadow_x0 - 1000.0) * math.exp(0.2)
    # p = 0.5 is unclamped for this law (floor mass 0.36, cap mass 0.30)
    assert quantile_shift(c, u, 0.5) == pytest.approx(expected, rel=1e-12)
    assert quantile_shift(u, u, 0.3) == 0.0


def test_quantile_shift_cap1500(volatile_market):
    c, u = _sc(volatile_market, 0.0, 1500.0), _sc(volatile_market)
    # p = 0.1 is unclamped for the cap-1500 law
    shift = quantile_shift(c, u, 0.1)
    assert shift == pytest.approx((c.shadow_x0 - 1000) * math.exp(0.2), rel=1e-12)
    assert shift == pytest.approx(3544.24, abs=0.01)


def test_quantile_shift_balanced(market):
    from cara_wealth.shadow import balanced_upper_bound

    ku = balanced_upper_bound(1000.0, market, 0.0)
    # p = 0.2 lies between the floor mass 0.15 and 1 - cap mass
    assert abs(quantile_shift(_sc(market, 0.0, ku), _sc(market), 0.2)) < 1e-6


def test_quantile_shift_needs_same_market(market, volatile_market):
    with pytest.raises(ParameterError):
        quantile_shift(_sc(market), _sc(volatile_market), 0.5)
