"""Theoretical terminal-wealth laws.

The shadow terminal wealth is normal,

    X~_T ~ N(X~0 e^{rT} + T theta^2/alpha,  (theta sqrt(T)/alpha)^2),

and the bounded strategies clamp it to [K_l, K_u]. The law is therefore
that normal between the bounds with point masses Phi((K_l - m)/s) at the
floor and 1 - Phi((K_u - m)/s) at the cap. Quantiles use the infimum
(left-continuous) definition, which amounts to clamping the normal
quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError
from .normal import normal_cdf, normal_pdf, normal_quantile  # noqa: F401  (re-exported)
from .strategies import Scenario


@dataclass(frozen=True)
class TerminalLaw:
    mean: float
    sd: float
    k_lower: Optional[float] = None
    k_upper: Optional[float] = None

    @property
    def mass_lower(self) -> float:
        if self.k_lower is None:
            return 0.0
        return float(normal_cdf((self.k_lower - self.mean) / self.sd))

    @property
    def mass_upper(self) -> float:
        if self.k_upper is None:
            return 0.0
        return float(normal_cdf(-(self.k_upper - self.mean) / self.sd))

    @property
    def support(self) -> tuple[float, float]:
        lo = -math.inf if self.k_lower is None else self.k_lower
        hi = math.inf if self.k_upper is None else self.k_upper
        return lo, hi

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        out = normal_cdf((x - self.mean) / self.sd)
        out = np.where(x < lo, 0.0, out)
        out = np.where(x >= hi, 1.0, out)
        return out if out.ndim else float(out)

    def quantile(self, p):
        return quantile(self, p)


def terminal_law(scenario: Scenario) -> TerminalLaw:
    if not scenario.is_resolved:
        raise ParameterError("terminal_law needs a resolved shadow value")
    m, a = scenario.market, scenario.investor.alpha
    th = m.theta
    mean = scenario.effective_shadow_x0 * math.exp(m.r * m.T) + m.T * th * th / a
    sd = th * math.sqrt(m.T) / a
    return TerminalLaw(mean, sd, scenario.bounds.k_lower, scenario.bounds.k_upper)


def quantile(law: TerminalLaw, p):
    """inf{z : F(z) >= p} for 0 < p < 1."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)) or np.any(np.isnan(arr)):
        raise DomainError("quantile requires 0 < p < 1")
    q = law.mean + law.sd * np.asarray(normal_quantile(arr))
    lo, hi = law.support
    q = np.clip(q, lo, hi)
    return q if q.ndim else float(q)


def quantile_shift(scenario_constrained: Scenario, scenario_unconstrained: Scenario, p: float) -> float:
    """Q~_p - Q_p between the bounded and the unbounded law.

    On the region where neither quantile is clamped this equals
    (X~0 - X0) e^{rT} for every p.
    """
    if scenario_constrained.market != scenario_unconstrained.market or (
        scenario_constrained.investor != scenario_unconstrained.investor
    ):
        raise ParameterError("quantile_shift needs scenarios with the same market and investor")
    q_c = quantile(terminal_law(scenario_constrained), p)
    q_u = quantile(terminal_law(scenario_unconstrained), p)
    return float(q_c - q_u)
