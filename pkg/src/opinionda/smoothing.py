"""Locally weighted scatterplot smoothing (LOWESS) of a complete daily series.

The abscissa is the integer day offset from the series start.  Each output
value is the fitted value of a weighted local linear regression over the
``ceil(window_fraction * n)`` nearest days, with tricube weights scaled by
the distance to the farthest of those days.  Equidistant candidates are
resolved in favour of the earlier day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .timeseries import DailySeries

MAX_ROBUSTNESS_ITERATIONS = 5


@dataclass(frozen=True)
class LowessConfig:
    window_fraction: float = 0.15
    robustness_iterations: int = 0

    def __post_init__(self):
        if not 0.0 < self.window_fraction <= 1.0:
            raise ValidationError("window_fraction must lie in (0, 1]")
        if not 0 <= self.robustness_iterations <= MAX_ROBUSTNESS_ITERATIONS:
            raise ValidationError(
                f"robustness_iterations must lie in [0, {MAX_ROBUSTNESS_ITERATIONS}]"
            )


def _tricube(u: np.ndarray) -> np.ndarray:
    u = np.clip(np.abs(u), 0.0, 1.0)
    return (1.0 - u**3) ** 3


def _neighbourhoods(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the ``k`` nearest points to each point and their tricube weights."""
    n = len(x)
    idx = np.empty((n, k), dtype=int)
    w = np.empty((n, k))
    for i in range(n):
        # stable sort keeps index order among equal distances: earlier day wins
        order = np.argsort(np.abs(x - x[i]), kind="stable")[:k]
        dist = np.abs(x[order] - x[i])
        h = dist.max()
        idx[i] = order
        w[i] = _tricube(dist / h) if h > 0 else 1.0
    return idx, w


def _local_linear(x, y, idx, w, i):
    xs, ys, ws = x[idx], y[idx], w
    sw = ws.sum()
    xm = np.dot(ws, xs) / sw
    ym = np.dot(ws, ys) / sw
    dx = xs - xm
    sxx = np.dot(ws, dx * dx)
    # too few positively weighted points for a slope: fall back to the local mean
    if sxx <= 1e-12 * sw * (1.0 + xm * xm):
        return ym
    slope = np.dot(ws, dx * (ys - ym)) / sxx
    return ym + slope * (x[i] - xm)


def lowess_values(y, window_fraction: float = 0.15, robustness_iterations: int = 0) -> np.ndarray:
    """LOWESS of equally spaced values ``y`` at abscissae ``0..n-1``."""
    cfg = LowessConfig(window_fraction, robustness_iterations)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 3:
        raise ValidationError("LOWESS needs at least 3 points")
    if np.isnan(y).any():
        raise ValidationError("series has gaps")
    k = math.ceil(cfg.window_fraction * n)
    if k < 2:
        raise ValidationError(f"smoothing window covers {k} point(s); need at least 2")
    x = np.arange(n, dtype=float)
    idx, w = _neighbourhoods(x, k)

    robust = np.ones(n)
    fitted = np.empty(n)
    for it in range(cfg.robustness_iterations + 1):
        for i in range(n):
            wi = w[i] * robust[idx[i]]
            if wi.sum() <= 0.0:
                wi = w[i]
            fitted[i] = _local_linear(x, y, idx[i], wi, i)
        if it == cfg.robustness_iterations:
            break
        resid = y - fitted
        s = np.median(np.abs(resid))
        if s == 0.0:
            break
        u = np.clip(resid / (6.0 * s), -1.0, 1.0)
        robust = (1.0 - u**2) ** 2
    return fitted


def lowess(s: DailySeries, cfg: LowessConfig | None = None) -> DailySeries:
    """Smooth a complete series; the output has the same dates as the input."""
    cfg = cfg or LowessConfig()
    if not s.is_complete:
        raise ValidationError("series has gaps")
    return s.with_values(
        lowess_values(s.values, cfg.window_fraction, cfg.robustness_iterations)
    )
