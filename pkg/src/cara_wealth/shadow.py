"""Shadow initial wealth from the budget constraint.

A bounded investor splits X0 into a shadow position X~0 following the
unconstrained strategy plus a long put (floor) and a short call (cap):

    X~0 + p(0, X~0) - c(0, X~0) = X0.

The left side is strictly increasing in X~0 (put delta > -1, call
delta < 1), so the root is unique. It is found by bracketed bisection
with secant (regula falsi, Illinois-damped) acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoundsError, SolverError
from .market import MarketParams
from .strategies import Bounds, Scenario, call_price, put_price

MAX_ITER = 200


@dataclass(frozen=True)
class ShadowSolution:
    shadow_x0: float
    residual: float
    iterations: int


def budget_gap(scenario: Scenario, candidate_shadow: float) -> float:
    """X~ + p(0, X~) - c(0, X~) - X0 for the scenario's active bounds."""
    m, a = scenario.market, scenario.investor.alpha
    b = scenario.bounds
    gap = candidate_shadow - scenario.investor.x0
    if b.k_lower is not None:
        gap += put_price(m, a, b.k_lower, 0.0, candidate_shadow)
    if b.k_upper is not None:
        gap -= call_price(m, a, b.k_upper, 0.0, candidate_shadow)
    return gap


def _bracket(scenario: Scenario):
    x0 = scenario.investor.x0
    m, a, b = scenario.market, scenario.investor.alpha, scenario.bounds
    p0 = put_price(m, a, b.k_lower, 0.0, x0) if b.k_lower is not None else 0.0
    c0 = call_price(m, a, b.k_upper, 0.0, x0) if b.k_upper is not None else 0.0
    lo, hi = x0 - p0 + c0 - 1.0, x0 + c0 + 1.0
    # scale of the problem: initial wealth or the terminal sd of the shadow wealth
    limit = 1e3 * max(abs(x0), m.theta * math.sqrt(m.T) / a) * math.exp(abs(m.r) * m.T)
    step = max(1.0, hi - lo)
    g_lo, g_hi = budget_gap(scenario, lo), budget_gap(scenario, hi)
    while g_lo > 0:
        lo -= step
        step *= 2.0
        if hi - lo > limit:
            raise SolverError("could not bracket the shadow value (inconsistent bounds?)")
        g_lo = budget_gap(scenario, lo)
    step = max(1.0, hi - lo)
    while g_hi < 0:
        hi += step
        step *= 2.0
        if hi - lo > limit:
            raise SolverError("could not bracket the shadow value (inconsistent bounds?)")
        g_hi = budget_gap(scenario, hi)
    return lo, hi, g_lo, g_hi


def solve_shadow(scenario: Scenario, tol: float | None = None) -> ShadowSolution:
    """Root of ``budget_gap``; |residual| <= 1e-11 max(1, X0) by default."""
    x0 = scenario.investor.x0
    tol = 1e-11 * max(1.0, abs(x0)) if tol is None else tol
    if scenario.bounds.k_lower is None and scenario.bounds.k_upper is None:
        return ShadowSolution(x0, 0.0, 0)

    lo, hi, g_lo, g_hi = _bracket(scenario)
    if g_lo == 0:
        return ShadowSolution(lo, 0.0, 0)
    if g_hi == 0:
        return ShadowSolution(hi, 0.0, 0)

    side = 0
    for it in range(1, MAX_ITER + 1):
        x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
        # fall back to bisection when the secant point leaves the interior
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        g = budget_gap(scenario, x)
        if abs(g) <= tol:
            return ShadowSolution(x, g, it)
        if g < 0:
            lo, g_lo = x, g
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            hi, g_hi = x, g
            if side == 1:
                g_lo *= 0.5
            side = 1
        if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            return ShadowSolution(x, g, it)
    raise SolverError(f"shadow value did not converge in {MAX_ITER} iterations")


def resolve(scenario: Scenario) -> Scenario:
    """Return the scenario with its shadow value filled in."""
    return scenario.with_shadow(solve_shadow(scenario).shadow_x0)


def balanced_upper_bound(x0: float, market: MarketParams, k_lower: float) -> float:
    """K_u = 2 X0 e^{rT} - K_l, the cap whose call exactly pays for the put."""
    k_upper = 2.0 * x0 * math.exp(market.r * market.T) - k_lower
    if not k_upper > k_lower:
        raise BoundsError(f"invalid bounds: balanced cap {k_upper} does not exceed k_lower {k_lower}")
    Bounds(k_lower, k_upper).validate(x0 * math.exp(market.r * market.T))
    return k_upper
