"""Scalar Optimal Interpolation.

The state is one daily support percentage.  With a frozen background
variance ``P_b`` the matrix update equations reduce to scalars::

    K   = P_b H / (H^2 P_b + R)
    x_a = x + K (z - H x)
    P_a = (1 - K H) P_b

Days without an observation pass the prior through unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import FilterDivergenceWarning, NumericalError, ValidationError
from .timeseries import DailySeries


def kalman_gain(P_b: float, H: float, R: float) -> float:
    if not P_b > 0 or not R > 0:
        raise ValidationError(f"variances must be positive (P_b={P_b}, R={R})")
    return P_b * H / (H * H * P_b + R)


def update_state(x_prior: float, z: float, K: float, H: float = 1.0) -> float:
    return x_prior + K * (z - H * x_prior)


def update_covariance(P_b: float, K: float, H: float = 1.0) -> float:
    if not P_b > 0:
        raise ValidationError(f"P_b must be positive, got {P_b}")
    P_a = (1.0 - K * H) * P_b
    if P_a < 0:
        raise NumericalError(f"divergent configuration: K*H = {K * H:g} exceeds 1")
    return P_a


@dataclass(frozen=True)
class OIParams:
    """Observation scale ``H``, observation variance ``R`` (%^2), frozen
    background variance ``P_b`` (%^2) and optional initial state ``x0`` (%)."""

    H: float = 1.0
    R: float = 13.08
    P_b: float = 266.06
    x0: float | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValidationError("R must be positive")
        if not self.P_b > 0:
            raise ValidationError("P_b must be positive")
        if self.H == 0:
            raise ValidationError("H must be non-zero")

    @property
    def gain(self) -> float:
        return kalman_gain(self.P_b, self.H, self.R)

    @classmethod
    def for_gain(cls, K: float, R: float = 13.08, H: float = 1.0, x0: float | None = None):
        """Parameters whose gain equals ``K`` for the given ``R`` and ``H``."""
        if not 0 < K * H < 1:
            raise ValidationError("K*H must lie in (0, 1)")
        return cls(H=H, R=R, P_b=K * R / (H * (1.0 - K * H)), x0=x0)


@dataclass(frozen=True)
class AssimilationResult:
    posterior: DailySeries
    gain: float
    posterior_variance: float
    observed_mask: np.ndarray
    innovations: np.ndarray
    biased_innovations: bool

    @property
    def n_observed(self) -> int:
        return int(self.observed_mask.sum())


def _innovation_bias(innov: np.ndarray) -> bool:
    n = len(innov)
    if n < 2:
        return False
    sd = innov.std(ddof=1)
    return bool(abs(innov.mean()) > 2.0 * sd / math.sqrt(n))


def assimilate_series(
    prior: DailySeries,
    obs: DailySeries,
    params: OIParams,
    window: tuple[date, date] | None = None,
) -> AssimilationResult:
    """Fuse a complete prior series with sparse observations day by day.

    The run covers ``window`` (default: the prior's extent).  The prior must
    be present on every day of the run except possibly the first, which
    falls back to ``params.x0``.  A :class:`FilterDivergenceWarning` is
    issued when the innovations have a mean more than two standard errors
    away from zero.
    """
    start, end = window or (prior.start, prior.end)
    if end < start or start > prior.end or end < prior.start:
        raise ValidationError("no overlap between the prior and the run window")
    x = prior.reindex(start, end).values.copy()
    if np.isnan(x[0]) and params.x0 is not None:
        x[0] = params.x0
    if np.isnan(x).any():
        raise ValidationError("prior must be complete over the run window")
    z = obs.reindex(start, end).values

    K = params.gain
    P_a = update_covariance(params.P_b, K, params.H)
    observed = ~np.isnan(z)
    post = x.copy()
    innov = z[observed] - params.H * x[observed]
    post[observed] = x[observed] + K * innov

    biased = _innovation_bias(innov)
    if biased:
        warnings.warn(
            f"innovation mean {innov.mean():.3f} is more than two standard errors from zero",
            FilterDivergenceWarning,
            stacklevel=2,
        )
    observed.setflags(write=False)
    innov.setflags(write=False)
    return AssimilationResult(
        posterior=DailySeries(start, post),
        gain=K,
        posterior_variance=P_a,
        observed_mask=observed,
        innovations=innov,
        biased_innovations=biased,
    )


def renormalize_camps(leave: DailySeries, remain: DailySeries) -> tuple[DailySeries, DailySeries]:
    """Rescale two camp series so they sum to 100 on days where both exist."""
    if leave.start != remain.start or len(leave) != len(remain):
        raise ValidationError("camp series must share dates")
    total = leave.values + remain.values
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(total > 0, 100.0 / total, np.nan)
    return leave.with_values(leave.values * scale), remain.with_values(remain.values * scale)
