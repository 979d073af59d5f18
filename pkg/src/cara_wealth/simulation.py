"""Seeded Monte Carlo engine with discrete self-financing rebalancing.

Grid: t_k = k h, k = 0..n, with n = round(T / h) and h re-set to T / n.
Path i draws its Brownian increments from ``GaussianStream(seed, i)``,
so results do not depend on batching or the number of worker threads.

Per step, with stock gross return R_k = exp((mu - sigma^2/2) h + sigma dW_k)
and amount A_k fixed at the left endpoint,

    X_{k+1} = A_k R_k + (X_k - A_k) e^{r h}.

The shadow wealth is taken from its exact solution on the same path,

    X~_t = X~0 e^{rt} + t theta^2/alpha e^{r(t-T)} + theta/alpha e^{r(t-T)} W_t,

so only the rebalancing of X carries discretization error.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distribution import TerminalLaw, quantile
from .errors import ParameterError
from .market import GaussianStream, MarketParams
from .strategies import (
    Scenario,
    StrategyKind,
    StrategySpec,
    call_price,
    optimal_amount,
    option_adjustment,
    put_price,
    strategy_amount,
)

# paths per vectorised batch; fixed so results never depend on `workers`
CHUNK = 256


@dataclass(frozen=True)
class SimConfig:
    s: int
    h: float
    seed: int

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise ParameterError(f"sample size must be a positive integer, got {self.s}")
        if not self.h > 0:
            raise ParameterError(f"step width must be positive, got {self.h}")

    def n_steps(self, T: float) -> int:
        if self.h > T * (1 + 1e-12):
            raise ParameterError(f"step width {self.h} exceeds horizon {T}")
        return max(1, int(round(T / self.h)))

    def grid(self, T: float) -> np.ndarray:
        n = self.n_steps(T)
        return np.arange(n + 1) * (T / n)


@dataclass
class PathRecord:
    times: np.ndarray
    stock: np.ndarray
    shadow: np.ndarray
    invested: np.ndarray  # NaN at t = T: no rebalancing there
    wealth: np.ndarray


@dataclass
class PathBatch:
    """Simulated paths. Full trajectories are kept only if recorded."""

    times: np.ndarray
    terminal_wealth: np.ndarray
    terminal_shadow: np.ndarray
    terminal_stock: np.ndarray
    stock: Optional[np.ndarray] = None
    shadow: Optional[np.ndarray] = None
    invested: Optional[np.ndarray] = None
    wealth: Optional[np.ndarray] = None
    max_invested_excess: float = -math.inf  # max over paths/dates of invested - wealth

    def __len__(self) -> int:
        return len(self.terminal_wealth)

    def __getitem__(self, i: int) -> PathRecord:
        if self.wealth is None:
            raise ParameterError("paths were not recorded; simulate with record_paths=True")
        return PathRecord(self.times, self.stock[i], self.shadow[i], self.invested[i], self.wealth[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def _brownian(seed: int, ids: range, n: int, dt: float) -> np.ndarray:
    dW = np.empty((len(ids), n))
    for row, i in enumerate(ids):
        dW[row] = GaussianStream(seed, i).normals(n)
    return dW * math.sqrt(dt)


def shadow_path(market: MarketParams, alpha: float, shadow_x0: float, times, W):
    """Closed-form optimal wealth process evaluated on Brownian values W."""
    th, r, T = market.theta, market.r, market.T
    times = np.asarray(times, dtype=float)
    disc = np.exp(r * (times - T))
    return shadow_x0 * np.exp(r * times) + times * th * th / alpha * disc + th / alpha * disc * W


def _run_chunk(scenario, spec, times, seed, ids, record):
    m = scenario.market
    n = len(times) - 1
    dt = times[1] - times[0]
    dW = _brownian(seed, ids, n, dt)
    W = np.concatenate([np.zeros((len(ids), 1)), np.cumsum(dW, axis=1)], axis=1)
    shadow = shadow_path(m, scenario.investor.alpha, scenario.effective_shadow_x0, times, W)
    gross = np.exp((m.mu - 0.5 * m.sigma**2) * dt + m.sigma * dW)
    stock = np.concatenate([np.ones((len(ids), 1)), np.cumprod(gross, axis=1)], axis=1)
    bond_growth = math.exp(m.r * dt)

    x = np.full(len(ids), scenario.investor.x0)
    wealth = np.empty((len(ids), n + 1)) if record else None
    invested = np.full((len(ids), n + 1), np.nan) if record else None
    excess = -math.inf
    for k in range(n):
        a = strategy_amount(spec, scenario, times[k], shadow[:, k], x)
        excess = max(excess, float(np.max(a - x)))
        if record:
            wealth[:, k] = x
            invested[:, k] = a
        x = a * gross[:, k] + (x - a) * bond_growth
    if record:
        wealth[:, n] = x
    return dict(
        terminal_wealth=x,
        terminal_shadow=shadow[:, -1],
        terminal_stock=stock[:, -1],
        stock=stock if record else None,
        shadow=shadow if record else None,
        invested=invested,
        wealth=wealth,
        excess=excess,
    )


def _chunks(s: int):
    return [range(i, min(i + CHUNK, s)) for i in range(0, s, CHUNK)]


def _merge(parts, key):
    if parts[0][key] is None:
        return None
    return np.concatenate([p[key] for p in parts], axis=0)


def simulate(
    scenario: Scenario,
    spec: StrategySpec,
    config: SimConfig,
    record_paths: bool = False,
    workers: int = 1,
) -> PathBatch:
    """Simulate ``config.s`` wealth paths of the given strategy."""
    if not scenario.is_resolved:
        raise ParameterError("simulate needs a resolved shadow value for bounded strategies")
    spec.check(scenario.bounds)
    times = config.grid(scenario.market.T)
    chunks = _chunks(config.s)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ids: _run_chunk(scenario, spec, times, config.seed, ids, record_paths), chunks))
    else:
        parts = [_run_chunk(scenario, spec, times, config.seed, ids, record_paths) for ids in chunks]
    return PathBatch(
        times=times,
        terminal_wealth=_merge(parts, "terminal_wealth"),
        terminal_shadow=_merge(parts, "terminal_shadow"),
        terminal_stock=_merge(parts, "terminal_stock"),
        stock=_merge(parts, "stock"),
        shadow=_merge(parts, "shadow"),
        invested=_merge(parts, "invested"),
        wealth=_merge(parts, "wealth"),
        max_invested_excess=max(p["excess"] for p in parts),
    )


def continuous_target(scenario: Scenario, spec: StrategySpec, terminal_shadow) -> np.ndarray:
    """Terminal wealth under continuous rebalancing: X~_T clamped to the active bounds."""
    lo = scenario.bounds.k_lower if spec.kind in (StrategyKind.LOWER_BOUNDED, StrategyKind.DOUBLY_BOUNDED) else None
    hi = scenario.bounds.k_upper if spec.kind in (StrategyKind.UPPER_BOUNDED, StrategyKind.DOUBLY_BOUNDED) else None
    x = np.asarray(terminal_shadow, dtype=float)
    return np.clip(x, -np.inf if lo is None else lo, np.inf if hi is None else hi)


def discretization_band(batch: PathBatch, scenario: Scenario, spec: StrategySpec, level: float = 0.95) -> float:
    """Measured spread of discretely hedged wealth around the bound mass points.

    The ``level`` quantile of |X_T - clamp(X~_T)| over the paths whose
    continuous-limit terminal value sits on a bound; 0 if there are none.
    """
    target = continuous_target(scenario, spec, batch.terminal_shadow)
    on_bound = target != batch.terminal_shadow
    if not np.any(on_bound):
        return 0.0
    return float(np.quantile(np.abs(batch.terminal_wealth - target)[on_bound], level))


def hedge_option(scenario: Scenario, option: str, config: SimConfig):
    """Discretely replicate the put (floor) or call (cap) on the shadow wealth.

    Starts from the option's price at t = 0 and holds fraction * price in
    the stock at each grid date. Returns (terminal hedge value, payoff).
    """
    m, alpha = scenario.market, scenario.investor.alpha
    x0s = scenario.effective_shadow_x0
    b = scenario.bounds
    if option == "put":
        if b.k_lower is None:
            raise ParameterError("put replication needs k_lower")
        kind, v0 = StrategyKind.LOWER_BOUNDED, put_price(m, alpha, b.k_lower, 0.0, x0s)
        sign = 1.0
    elif option == "call":
        if b.k_upper is None:
            raise ParameterError("call replication needs k_upper")
        kind, v0 = StrategyKind.UPPER_BOUNDED, call_price(m, alpha, b.k_upper, 0.0, x0s)
        sign = -1.0
    else:
        raise ParameterError(f"option must be 'put' or 'call', got {option!r}")

    times = config.grid(m.T)
    n = len(times) - 1
    dt = times[1] - times[0]
    values, payoffs = [], []
    for ids in _chunks(config.s):
        dW = _brownian(config.seed, ids, n, dt)
        W = np.concatenate([np.zeros((len(ids), 1)), np.cumsum(dW, axis=1)], axis=1)
        shadow = shadow_path(m, alpha, x0s, times, W)
        gross = np.exp((m.mu - 0.5 * m.sigma**2) * dt + m.sigma * dW)
        g = math.exp(m.r * dt)
        v = np.full(len(ids), v0)
        for k in range(n):
            # fraction * price = (adjustment - 1) * optimal amount; sign flips for the short call
            a = sign * (option_adjustment(scenario, kind, times[k], shadow[:, k]) - 1.0)
            a = a * optimal_amount(m, alpha, times[k])
            v = a * gross[:, k] + (v - a) * g
        values.append(v)
        xT = shadow[:, -1]
        payoffs.append(np.maximum(b.k_lower - xT, 0.0) if option == "put" else np.maximum(xT - b.k_upper, 0.0))
    return np.concatenate(values), np.concatenate(payoffs)


@dataclass
class DistributionSummary:
    probabilities: np.ndarray
    quantiles: np.ndarray
    ml_mean: float
    ml_sd: float
    hist_edges: np.ndarray
    hist_mass: np.ndarray
    fraction_at_lower: Optional[float]
    fraction_at_upper: Optional[float]
    n: int


def _terminal(paths) -> np.ndarray:
    if isinstance(paths, PathBatch):
        return paths.terminal_wealth
    return np.asarray(paths, dtype=float).ravel()


def summarize(
    paths,
    probabilities: Sequence[float],
    k_lower: Optional[float] = None,
    k_upper: Optional[float] = None,
    bins: int = 50,
    band: float = 0.0,
) -> DistributionSummary:
    """Empirical quantiles, normal ML fit, histogram and bound masses.

    Quantiles are order statistics with the infimum convention
    (``inverted_cdf``). A terminal value counts as sitting on a bound when
    it is within 1e-6 max(1, |K|) + ``band`` of it, or beyond it.
    """
    x = _terminal(paths)
    if x.size == 0:
        raise ParameterError("summarize needs at least one path")
    probs = np.asarray(probabilities, dtype=float)
    if np.any((probs <= 0) | (probs >= 1)):
        raise ParameterError("probabilities must lie in (0, 1)")
    q = np.quantile(x, probs, method="inverted_cdf")
    counts, edges = np.histogram(x, bins=bins)
    frac_lo = frac_hi = None
    if k_lower is not None:
        frac_lo = float(np.mean(x <= k_lower + 1e-6 * max(1.0, abs(k_lower)) + band))
    if k_upper is not None:
        frac_hi = float(np.mean(x >= k_upper - 1e-6 * max(1.0, abs(k_upper)) - band))
    return DistributionSummary(
        probabilities=probs,
        quantiles=q,
        ml_mean=float(np.mean(x)),
        ml_sd=float(np.std(x)),
        hist_edges=edges,
        hist_mass=counts / x.size,
        fraction_at_lower=frac_lo,
        fraction_at_upper=frac_hi,
        n=int(x.size),
    )


@dataclass(frozen=True)
class DeviationEntry:
    p: float
    theoretical: float
    empirical: float
    deviation: float  # NaN when flagged
    flagged: bool


def deviation_report(summary: DistributionSummary, law: TerminalLaw, probabilities=None) -> list[DeviationEntry]:
    """Signed relative deviations (Q_emp - Q_theor) / Q_theor per probability."""
    probs = summary.probabilities if probabilities is None else np.asarray(probabilities, dtype=float)
    out = []
    for p in probs:
        idx = np.flatnonzero(np.isclose(summary.probabilities, p, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise ParameterError(f"probability {p} not present in the summary")
        emp = float(summary.quantiles[idx[0]])
        theo = float(quantile(law, p))
        if theo == 0.0:
            out.append(DeviationEntry(float(p), theo, emp, math.nan, True))
        else:
            out.append(DeviationEntry(float(p), theo, emp, (emp - theo) / theo, False))
    return out
