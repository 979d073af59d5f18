"""Black-Scholes market, CARA investor, and reproducible Gaussian streams.

Bond:   dB = r B dt,              B(0) = 1
Stock:  dS = mu S dt + sigma S dW, S(0) = 1
State price density:  H(t) = exp(-(r + theta^2/2) t - theta W_t)

with market price of risk theta = (mu - r) / sigma. Negative and zero
rates are allowed; mu > r is required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

# slack for t == T comparisons after float accumulation of grid times
_TIME_EPS = 1e-12


@dataclass(frozen=True)
class MarketParams:
    r: float
    mu: float
    sigma: float
    T: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not (self.T > 0):
            raise ParameterError(f"T must be positive, got {self.T}")
        if not (self.mu > self.r):
            raise ParameterError(f"mu must exceed r (mu={self.mu}, r={self.r})")

    @property
    def theta(self) -> float:
        """Market price of risk (mu - r) / sigma."""
        return (self.mu - self.r) / self.sigma

    def discount(self, t: float) -> float:
        """e^{-r (T - t)}."""
        return math.exp(-self.r * (self.T - t))

    def check_time(self, t: float) -> None:
        if t < -_TIME_EPS or t > self.T + _TIME_EPS:
            raise DomainError(f"t={t} outside [0, {self.T}]")


@dataclass(frozen=True)
class InvestorParams:
    alpha: float
    x0: float

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ParameterError(f"risk aversion alpha must be positive, got {self.alpha}")
        if not (self.x0 > 0):
            raise ParameterError(f"initial wealth x0 must be positive, got {self.x0}")


@dataclass(frozen=True)
class GaussianStream:
    """Counter-based N(0,1) substream keyed by (seed, stream_id).

    Each stream owns an independent Philox key derived through
    ``SeedSequence``, so draws never depend on which thread or batch
    evaluates the stream.
    """

    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def normals(self, n: int) -> np.ndarray:
        return self.generator().standard_normal(n)


def bond_price(params: MarketParams, t: float) -> float:
    params.check_time(t)
    return math.exp(params.r * t)


def stock_step(params: MarketParams, s_t, dt, dW):
    """Exact log-normal update over dt given the Brownian increment dW."""
    if np.any(np.asarray(s_t) <= 0) or np.any(np.asarray(dt) <= 0):
        raise DomainError("stock_step requires s_t > 0 and dt > 0")
    return s_t * np.exp((params.mu - 0.5 * params.sigma**2) * dt + params.sigma * dW)


def utility(alpha: float, x):
    """Exponential utility U(x) = -exp(-alpha x)."""
    if not (alpha > 0):
        raise ParameterError("alpha must be positive")
    return -np.exp(-alpha * np.asarray(x, dtype=float))


def state_price_density(params: MarketParams, t: float, w_t):
    params.check_time(t)
    th = params.theta
    return np.exp(-(params.r + 0.5 * th * th) * t - th * np.asarray(w_t, dtype=float))
