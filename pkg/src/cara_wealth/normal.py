"""Standard normal helpers used throughout the package.

Besides Phi, phi and the inverse, two composite functions show up in
every option formula:

    L(d) = E[(d - Z)^+] = d * Phi(d) + phi(d)          (normal loss)
    Phi(d) / L(d)                                       (delta over price)

For d << 0 both numerator and denominator underflow, so they are
evaluated through the Mills ratio R(x) = Phi(-x) / phi(x), which
``scipy.special.erfcx`` gives without cancellation. Beyond |d| > 12 the
remaining term 1 - x R(x) is taken from its asymptotic series.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)
_ASYMPTOTIC_CUTOFF = 12.0
_SERIES_TERMS = 12


def normal_cdf(z):
    """Phi(z), vectorised. Absolute error ~1e-16."""
    return special.ndtr(z)


def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / SQRT_2PI
    return out if out.ndim else float(out)


def normal_quantile(p):
    """Inverse of Phi on (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)) or np.any(np.isnan(arr)):
        raise ValueError("normal_quantile requires 0 < p < 1")
    out = special.ndtri(arr)
    return out if out.ndim else float(out)


def _mills(x):
    # R(x) = Phi(-x) / phi(x) for x >= 0
    return math.sqrt(math.pi / 2.0) * special.erfcx(x / math.sqrt(2.0))


def _one_minus_x_mills(x):
    """1 - x R(x) for x >= 0, stable for large x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _ASYMPTOTIC_CUTOFF
    xs = x[small]
    out[small] = 1.0 - xs * _mills(xs)
    xl = x[~small]
    if xl.size:
        inv2 = 1.0 / (xl * xl)
        term = inv2.copy()
        acc = term.copy()
        for k in range(2, _SERIES_TERMS + 1):
            term = -term * (2 * k - 1) * inv2
            acc += term
        out[~small] = acc
    return out


def normal_loss(d):
    """L(d) = d Phi(d) + phi(d) = E[(d - Z)^+]; strictly positive."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    pos = d >= 0.0
    dp = d[pos]
    out[pos] = dp * special.ndtr(dp) + np.exp(-0.5 * dp * dp) / SQRT_2PI
    x = -d[~pos]
    out[~pos] = np.exp(-0.5 * x * x) / SQRT_2PI * _one_minus_x_mills(x)
    return out if out.ndim else float(out)


def cdf_over_loss(d):
    """Phi(d) / L(d), finite for every real d."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    pos = d >= 0.0
    dp = d[pos]
    out[pos] = special.ndtr(dp) / (dp * special.ndtr(dp) + np.exp(-0.5 * dp * dp) / SQRT_2PI)
    x = -d[~pos]
    out[~pos] = _mills(x) / _one_minus_x_mills(x)
    return out if out.ndim else float(out)
