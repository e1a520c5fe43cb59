"""Estimation of the observation variance R and the frozen background variance P_b."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assimilation import kalman_gain
from .errors import ValidationError
from .timeseries import Camp, PollRecord, same_day_groups

# P_b presets (%^2) and the observation variance they were paired with.
GAIN_PRESETS = {"high": 266.06, "mid": 45.0, "low": 10.0}
DEFAULT_R = 13.08


class Method(str, enum.Enum):
    SAME_DAY_POLLS = "same_day_polls"
    SNAPSHOT_COVARIANCE = "snapshot_covariance"
    MANUAL = "manual"


@dataclass(frozen=True)
class ParamEstimate:
    value: float
    method: Method
    sample_size: int

    def __post_init__(self):
        if not self.value >= 0:
            raise ValidationError("variance estimate must be non-negative")
        if self.method is not Method.MANUAL and self.sample_size < 2:
            raise ValidationError("estimated parameters need a sample size of at least 2")

    @classmethod
    def manual(cls, value: float) -> "ParamEstimate":
        return cls(float(value), Method.MANUAL, 0)


def estimate_R_same_day(polls: Sequence[PollRecord], camp: "Camp | str") -> ParamEstimate:
    """Pooled within-day variance of polls released on the same date.

    Days with a single poll carry no information and are ignored.  The
    estimate is ``sum_d sum_i (y_di - mean_d)^2 / sum_d (n_d - 1)``;
    ``sample_size`` counts the polls on multi-poll days.
    """
    ss = 0.0
    dof = 0
    n = 0
    for shares in same_day_groups(polls, camp).values():
        if len(shares) < 2:
            continue
        v = np.asarray(shares, dtype=float)
        ss += float(np.sum((v - v.mean()) ** 2))
        dof += len(v) - 1
        n += len(v)
    if dof == 0:
        raise ValidationError("R not estimable: no date has two or more polls")
    return ParamEstimate(ss / dof, Method.SAME_DAY_POLLS, n)


def estimate_Pb_snapshots(states) -> ParamEstimate:
    """Sample variance of state snapshots (``1/(N_e - 1)`` normalisation)."""
    x = np.asarray(states, dtype=float).ravel()
    x = x[~np.isnan(x)]
    if x.size < 2:
        raise ValidationError("need at least 2 snapshots")
    return ParamEstimate(float(np.var(x, ddof=1)), Method.SNAPSHOT_COVARIANCE, int(x.size))


def gain_bounds(
    R: ParamEstimate, Pb_low: ParamEstimate, Pb_high: ParamEstimate, H: float = 1.0
) -> tuple[float, float]:
    """Gains implied by the lower and upper background variance."""
    k_low = kalman_gain(Pb_low.value, H, R.value)
    k_high = kalman_gain(Pb_high.value, H, R.value)
    if k_low > k_high:
        raise ValidationError("Pb_low yields a larger gain than Pb_high")
    if k_low == k_high:
        warnings.warn("degenerate gain bounds: lower and upper gain coincide", stacklevel=2)
    return k_low, k_high


def preset_background(name: str) -> ParamEstimate:
    try:
        return ParamEstimate.manual(GAIN_PRESETS[name])
    except KeyError:
        raise ValidationError(
            f"unknown gain preset {name!r}; expected one of {sorted(GAIN_PRESETS)}"
        ) from None
