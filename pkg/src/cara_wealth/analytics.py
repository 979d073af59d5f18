"""Probabilities that the 100%-investment restriction never or always binds.

On yearly dates t = 1..T-1, with the conditional one-step probabilities
multiplied together:

No effect (X0 >= a(0)): the unrestricted optimal wealth stays above the
optimal amount a(t) = theta/(alpha sigma) e^{-r(T-t)},

    P = prod_{t=0}^{T-2} Phi((C_t + theta) / sqrt(t+1)),
    C_t = (alpha/theta) X0 e^{rT} + theta t - 1/sigma.

Fully constrained (X0 <= a(0)): wealth fully invested in the stock stays
below a(t),

    P = prod_{t=0}^{T-2} Phi(A_t / (sigma sqrt(t+1))),
    A_t = ln(theta / (sigma alpha X0)) - r(T-t-1) + s (mu - sigma^2/2)(t+1).

The published construction has s = +1. A path X0 exp((mu - sigma^2/2) t
+ sigma W_t) gives s = -1; ``convention="gbm"`` selects that variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .market import GaussianStream, MarketParams
from .normal import normal_cdf
from .strategies import optimal_amount

_REL_SLACK = 1e-12
CONVENTIONS = ("published", "gbm")


@dataclass(frozen=True)
class RestrictionProbabilities:
    p_no_effect: Optional[float]
    p_fully_constrained: Optional[float]
    factors_no_effect: Optional[np.ndarray]
    factors_fully_constrained: Optional[np.ndarray]


def _yearly(market: MarketParams) -> np.ndarray:
    T = market.T
    if abs(T - round(T)) > 1e-12 or round(T) < 2:
        raise DomainError(f"yearly iteration needs an integer horizon T >= 2, got {T}")
    return np.arange(int(round(T)) - 1, dtype=float)


def no_effect_factors(market: MarketParams, alpha: float, x0: float) -> np.ndarray:
    t = _yearly(market)
    th = market.theta
    c = alpha / th * x0 * math.exp(market.r * market.T) + th * t - 1.0 / market.sigma
    return normal_cdf((c + th) / np.sqrt(t + 1.0))


def fully_constrained_factors(market: MarketParams, alpha: float, x0: float, convention: str = "published") -> np.ndarray:
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    t = _yearly(market)
    m = market
    sign = 1.0 if convention == "published" else -1.0
    a = math.log(m.theta / (m.sigma * alpha * x0)) - m.r * (m.T - t - 1.0) + sign * (m.mu - 0.5 * m.sigma**2) * (t + 1.0)
    return normal_cdf(a / (m.sigma * np.sqrt(t + 1.0)))


def _check_x0(market, alpha, x0, above: bool, enforce: bool):
    if x0 <= 0:
        raise ParameterError(f"x0 must be positive, got {x0}")
    a0 = optimal_amount(market, alpha, 0.0)
    ok = x0 >= a0 * (1 - _REL_SLACK) if above else x0 <= a0 * (1 + _REL_SLACK)
    if enforce and not ok:
        rel = ">=" if above else "<="
        raise DomainError(f"requires x0 {rel} optimal amount at t=0 ({a0:.6g}), got {x0:.6g}")
    return ok


def prob_no_effect(market: MarketParams, alpha: float, x0: float, enforce: bool = True) -> float:
    """Probability that the restriction never binds on the optimal path."""
    _check_x0(market, alpha, x0, above=True, enforce=enforce)
    return float(np.prod(no_effect_factors(market, alpha, x0)))


def prob_fully_constrained(
    market: MarketParams, alpha: float, x0: float, convention: str = "published", enforce: bool = True
) -> float:
    """Probability that the restricted wealth stays fully invested throughout."""
    _check_x0(market, alpha, x0, above=False, enforce=enforce)
    return float(np.prod(fully_constrained_factors(market, alpha, x0, convention)))


def restriction_probabilities(market: MarketParams, alpha: float, x0: float, convention: str = "published"):
    """Both probabilities; the one whose precondition fails is None."""
    ne = fe = None
    f_ne = f_fc = None
    if _check_x0(market, alpha, x0, True, False):
        f_ne = no_effect_factors(market, alpha, x0)
        ne = float(np.prod(f_ne))
    if _check_x0(market, alpha, x0, False, False):
        f_fc = fully_constrained_factors(market, alpha, x0, convention)
        fe = float(np.prod(f_fc))
    return RestrictionProbabilities(ne, fe, f_ne, f_fc)


def mc_no_effect(market: MarketParams, alpha: float, x0: float, n: int, seed: int) -> float:
    """Monte Carlo: optimal wealth above a(t) at every yearly date 1..T-1."""
    t = _yearly(market) + 1.0
    W = np.cumsum(_yearly_normals(seed, n, len(t)), axis=1)
    th, r, T = market.theta, market.r, market.T
    # X_t > a(t)  <=>  (alpha/theta) X0 e^{rT} + theta t + W_t > 1/sigma
    lhs = alpha / th * x0 * math.exp(r * T) + th * t + W
    return float(np.mean(np.all(lhs > 1.0 / market.sigma, axis=1)))


def mc_fully_constrained(market: MarketParams, alpha: float, x0: float, n: int, seed: int) -> float:
    """Monte Carlo: fully invested wealth X0 S_t below a(t) at every yearly date 1..T-1."""
    t = _yearly(market) + 1.0
    W = np.cumsum(_yearly_normals(seed, n, len(t)), axis=1)
    m = market
    log_wealth = math.log(x0) + (m.mu - 0.5 * m.sigma**2) * t + m.sigma * W
    log_amount = math.log(m.theta / (alpha * m.sigma)) - m.r * (m.T - t)
    return float(np.mean(np.all(log_wealth < log_amount, axis=1)))


def _yearly_normals(seed: int, n: int, k: int) -> np.ndarray:
    # one stream for the whole block: (n, k) unit-variance yearly increments
    return GaussianStream(seed, 0).normals(n * k).reshape(n, k)


@dataclass(frozen=True)
class LimitRow:
    mu: float
    sigma: float
    theta: float
    x0: float
    p_no_effect: float
    p_fully_constrained: float
    no_effect_precondition: bool
    fully_constrained_precondition: bool
    mc_no_effect: Optional[float] = None
    mc_fully_constrained: Optional[float] = None


def limit_diagnostics(
    markets: Sequence[MarketParams],
    alpha: float,
    x0: float,
    convention: str = "published",
    mc_paths: int = 0,
    seed: Optional[int] = None,
) -> list[LimitRow]:
    """Tabulate both probabilities along a parameter sweep at fixed x0.

    Preconditions are reported per row rather than enforced, so a sweep
    can cross a(0) = x0. With ``mc_paths > 0`` the joint probabilities are
    also estimated by simulation (the closed forms multiply one-step
    conditionals and need not match them).
    """
    if mc_paths and seed is None:
        raise ParameterError("Monte Carlo columns need a seed")
    rows = []
    for m in markets:
        ne_ok = _check_x0(m, alpha, x0, True, False)
        fc_ok = _check_x0(m, alpha, x0, False, False)
        row = dict(
            mu=m.mu,
            sigma=m.sigma,
            theta=m.theta,
            x0=x0,
            p_no_effect=prob_no_effect(m, alpha, x0, enforce=False),
            p_fully_constrained=prob_fully_constrained(m, alpha, x0, convention, enforce=False),
            no_effect_precondition=ne_ok,
            fully_constrained_precondition=fc_ok,
        )
        if mc_paths:
            row["mc_no_effect"] = mc_no_effect(m, alpha, x0, mc_paths, seed)
            row["mc_fully_constrained"] = mc_fully_constrained(m, alpha, x0, mc_paths, seed)
        rows.append(LimitRow(**row))
    return rows
