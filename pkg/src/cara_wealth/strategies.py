"""Closed-form strategies for exponential utility with terminal wealth bounds.

Unconstrained optimum (amount held in the stock, independent of wealth):

    a(t) = theta / (alpha sigma) * exp(-r (T - t))

A floor K_l is reached by holding the unconstrained strategy on a shadow
wealth X~ plus a put on X~_T struck at K_l; a cap K_u by selling a call.
With tau = T - t and the standardized moneyness

    d(K, t, X~) = (K - X~ e^{r tau}) alpha / (theta sqrt(tau))

the option prices are

    p = Phi(d_l) (K_l e^{-r tau} - X~) + theta sqrt(tau)/alpha e^{-r tau} phi(d_l)
    c = Phi(-d_u) (X~ - K_u e^{-r tau}) + theta sqrt(tau)/alpha e^{-r tau} phi(d_u)

and both collapse to g(tau) L(+-d) with g = theta sqrt(tau)/alpha e^{-r tau}
and L the normal loss function, which is how they are evaluated here.
The replicating fractions satisfy fraction * price = -+Phi(+-d) * a(t), so
the bounded strategies invest

    lower:  a(t) (1 - Phi(d_l))
    upper:  a(t) (1 - Phi(-d_u))
    both:   a(t) (1 - Phi(d_l) - Phi(-d_u)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import BoundsError, DomainError, ParameterError
from .market import InvestorParams, MarketParams, _TIME_EPS
from .normal import cdf_over_loss, normal_cdf, normal_loss


class StrategyKind(enum.Enum):
    UNCONSTRAINED = "unconstrained"
    LOWER_BOUNDED = "lower"
    UPPER_BOUNDED = "upper"
    DOUBLY_BOUNDED = "doubly"

    @classmethod
    def parse(cls, text: str) -> "StrategyKind":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "unconstrained": cls.UNCONSTRAINED,
            "lower": cls.LOWER_BOUNDED,
            "lower_bounded": cls.LOWER_BOUNDED,
            "upper": cls.UPPER_BOUNDED,
            "upper_bounded": cls.UPPER_BOUNDED,
            "doubly": cls.DOUBLY_BOUNDED,
            "doubly_bounded": cls.DOUBLY_BOUNDED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"unknown strategy kind {text!r}") from None


@dataclass(frozen=True)
class Bounds:
    k_lower: Optional[float] = None
    k_upper: Optional[float] = None

    def validate(self, forward_wealth: float) -> None:
        """Check the bounds against X0 e^{rT}; raises BoundsError."""
        lo, hi = self.k_lower, self.k_upper
        if lo is not None and not lo < forward_wealth:
            raise BoundsError(
                f"invalid bounds: k_lower={lo} must be below X0*e^(rT)={forward_wealth:.6g}"
            )
        if hi is not None and not hi >= forward_wealth:
            raise BoundsError(
                f"invalid bounds: k_upper={hi} must be at least X0*e^(rT)={forward_wealth:.6g}"
            )
        if lo is not None and hi is not None and not lo < hi:
            raise BoundsError(f"invalid bounds: k_lower={lo} must be below k_upper={hi}")

    @property
    def natural_kind(self) -> StrategyKind:
        if self.k_lower is None and self.k_upper is None:
            return StrategyKind.UNCONSTRAINED
        if self.k_upper is None:
            return StrategyKind.LOWER_BOUNDED
        if self.k_lower is None:
            return StrategyKind.UPPER_BOUNDED
        return StrategyKind.DOUBLY_BOUNDED


@dataclass(frozen=True)
class Scenario:
    """Market + investor + bounds, optionally with a resolved shadow value."""

    market: MarketParams
    investor: InvestorParams
    bounds: Bounds = Bounds()
    shadow_x0: Optional[float] = None

    def __post_init__(self):
        self.bounds.validate(self.forward_wealth)

    @property
    def forward_wealth(self) -> float:
        return self.investor.x0 * math.exp(self.market.r * self.market.T)

    @property
    def is_resolved(self) -> bool:
        return self.shadow_x0 is not None or self.bounds.natural_kind is StrategyKind.UNCONSTRAINED

    @property
    def effective_shadow_x0(self) -> float:
        """Shadow initial wealth; equals X0 when no bound is active."""
        if self.shadow_x0 is not None:
            return self.shadow_x0
        if self.bounds.natural_kind is StrategyKind.UNCONSTRAINED:
            return self.investor.x0
        raise ParameterError("scenario has bounds but no resolved shadow value")

    def with_shadow(self, shadow_x0: float) -> "Scenario":
        return replace(self, shadow_x0=shadow_x0)

    def without_bounds(self) -> "Scenario":
        return Scenario(self.market, self.investor)


@dataclass(frozen=True)
class StrategySpec:
    kind: StrategyKind
    cap_investment: bool = False

    def check(self, bounds: Bounds) -> None:
        need_lo = self.kind in (StrategyKind.LOWER_BOUNDED, StrategyKind.DOUBLY_BOUNDED)
        need_hi = self.kind in (StrategyKind.UPPER_BOUNDED, StrategyKind.DOUBLY_BOUNDED)
        if need_lo and bounds.k_lower is None:
            raise ParameterError(f"{self.kind.value} strategy requires k_lower")
        if need_hi and bounds.k_upper is None:
            raise ParameterError(f"{self.kind.value} strategy requires k_upper")


def _tau(market: MarketParams, t: float) -> float:
    market.check_time(t)
    return max(market.T - t, 0.0)


def _open_tau(market: MarketParams, t: float) -> float:
    tau = _tau(market, t)
    if tau <= _TIME_EPS:
        raise DomainError("closed form is undefined at t = T")
    return tau


def optimal_amount(market: MarketParams, alpha: float, t: float) -> float:
    """Unconstrained optimal amount held in the stock at time t."""
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    _tau(market, t)
    return market.theta / (alpha * market.sigma) * market.discount(t)


def value_function(market: MarketParams, alpha: float, t: float, x):
    """V(t, x) = -exp(-alpha x e^{r(T-t)} - theta^2/2 (T-t))."""
    tau = _tau(market, t)
    x = np.asarray(x, dtype=float)
    return -np.exp(-alpha * x * math.exp(market.r * tau) - 0.5 * market.theta**2 * tau)


def hjb_residual(
    market: MarketParams,
    alpha: float,
    t: float,
    x: float,
    dt_fd: float,
    dx_fd: float,
    value: Optional[Callable[[float, float], float]] = None,
) -> float:
    """V_t + r x V_x - theta^2/2 V_x^2 / V_xx by central differences.

    ``value`` defaults to the closed-form value function; pass another
    callable ``value(t, x)`` to test a candidate that is not a solution.
    """
    if not (dt_fd > 0 and dx_fd > 0):
        raise DomainError("finite-difference steps must be positive")
    if not (t - dt_fd >= 0 and t + dt_fd <= market.T):
        raise DomainError("t +- dt_fd must stay inside [0, T]")
    if value is None:
        def value(tt, xx):
            return float(value_function(market, alpha, tt, xx))
    v0 = value(t, x)
    v_t = (value(t + dt_fd, x) - value(t - dt_fd, x)) / (2 * dt_fd)
    v_xp, v_xm = value(t, x + dx_fd), value(t, x - dx_fd)
    v_x = (v_xp - v_xm) / (2 * dx_fd)
    v_xx = (v_xp - 2 * v0 + v_xm) / dx_fd**2
    if v_xx == 0:
        raise DomainError("degenerate second derivative; step too small")
    return v_t + market.r * x * v_x - 0.5 * market.theta**2 * v_x**2 / v_xx


def _moneyness(market, alpha, k, tau, shadow_x):
    x = np.asarray(shadow_x, dtype=float)
    return (k - x * math.exp(market.r * tau)) * alpha / (math.sqrt(tau) * market.theta)


def d_lower(market: MarketParams, alpha: float, k_lower: float, t: float, shadow_x):
    return _moneyness(market, alpha, k_lower, _open_tau(market, t), shadow_x)


def d_upper(market: MarketParams, alpha: float, k_upper: float, t: float, shadow_x):
    return _moneyness(market, alpha, k_upper, _open_tau(market, t), shadow_x)


def _time_value_scale(market, alpha, tau):
    return market.theta * math.sqrt(tau) / alpha * math.exp(-market.r * tau)


def put_price(market: MarketParams, alpha: float, k_lower: float, t: float, shadow_x):
    """Price of the put paying max(K_l - X~_T, 0); payoff at t = T."""
    tau = _tau(market, t)
    x = np.asarray(shadow_x, dtype=float)
    if tau <= _TIME_EPS:
        out = np.maximum(k_lower - x, 0.0)
    else:
        d = _moneyness(market, alpha, k_lower, tau, x)
        out = _time_value_scale(market, alpha, tau) * normal_loss(d)
    return out if np.ndim(out) else float(out)


def call_price(market: MarketParams, alpha: float, k_upper: float, t: float, shadow_x):
    """Price of the call paying max(X~_T - K_u, 0); payoff at t = T."""
    tau = _tau(market, t)
    x = np.asarray(shadow_x, dtype=float)
    if tau <= _TIME_EPS:
        out = np.maximum(x - k_upper, 0.0)
    else:
        d = _moneyness(market, alpha, k_upper, tau, x)
        out = _time_value_scale(market, alpha, tau) * normal_loss(-d)
    return out if np.ndim(out) else float(out)


def put_replication_fraction(market: MarketParams, alpha: float, k_lower: float, t: float, shadow_x):
    """-Phi(d_l) / (sigma sqrt(tau) (Phi(d_l) d_l + phi(d_l))); t < T only."""
    tau = _open_tau(market, t)
    d = _moneyness(market, alpha, k_lower, tau, shadow_x)
    return -cdf_over_loss(d) / (market.sigma * math.sqrt(tau))


def call_replication_fraction(market: MarketParams, alpha: float, k_upper: float, t: float, shadow_x):
    """Phi(-d_u) / (sigma sqrt(tau) (phi(d_u) - Phi(-d_u) d_u)); t < T only."""
    tau = _open_tau(market, t)
    d = _moneyness(market, alpha, k_upper, tau, shadow_x)
    return cdf_over_loss(-d) / (market.sigma * math.sqrt(tau))


def option_adjustment(scenario: Scenario, kind: StrategyKind, t: float, shadow_x):
    """Multiplier m with strategy amount = m * optimal_amount.

    m = 1 - Phi(d_l) [floor] - Phi(-d_u) [cap]; this is fraction * price
    for each option divided by the unconstrained amount, written without
    the 0/0 that the product form hits deep out of the money.
    """
    market, alpha = scenario.market, scenario.investor.alpha
    x = np.asarray(shadow_x, dtype=float)
    m = np.ones_like(x)
    if kind is StrategyKind.UNCONSTRAINED:
        return m
    tau = _open_tau(market, t)
    b = scenario.bounds
    if kind in (StrategyKind.LOWER_BOUNDED, StrategyKind.DOUBLY_BOUNDED):
        m = m - normal_cdf(_moneyness(market, alpha, b.k_lower, tau, x))
    if kind in (StrategyKind.UPPER_BOUNDED, StrategyKind.DOUBLY_BOUNDED):
        m = m - normal_cdf(-_moneyness(market, alpha, b.k_upper, tau, x))
    return m


def strategy_amount(spec: StrategySpec, scenario: Scenario, t: float, shadow_x, wealth=None):
    """Amount invested in the stock at (t, X~_t).

    With ``spec.cap_investment`` the amount is replaced by the current
    wealth whenever it exceeds it (fully invested, fraction 1).
    """
    spec.check(scenario.bounds)
    if _tau(scenario.market, t) <= _TIME_EPS:
        raise DomainError("no rebalancing at t = T")
    base = optimal_amount(scenario.market, scenario.investor.alpha, t)
    amount = base * option_adjustment(scenario, spec.kind, t, shadow_x)
    if spec.cap_investment:
        if wealth is None:
            raise ParameterError("cap_investment requires the current wealth")
        w = np.asarray(wealth, dtype=float)
        amount = np.where(amount > w, w, amount)
    return amount if np.ndim(amount) else float(amount)
