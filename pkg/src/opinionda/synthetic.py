"""Synthetic latent opinion with two distorted, time-displaced observers.

Observer A plays the social-media role: it leads the truth by
``lead_days`` and carries an affine distortion.  Observer B plays the poll
role: it trails the truth by ``lag_days`` and reports on a random subset of
days, possibly several times per day.  Everything is deterministic in the
seed.

Truth and observers are Leave shares; Remain is their complement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from datetime import date, timedelta
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .timeseries import Camp, DailySeries, Mode, PollRecord, TweetCount, poll_series

TRUTH_BOUNDS = (5.0, 95.0)

DEFAULT_TRUTH_PARAMS = {
    "random_walk": {"mean": 50.0, "sigma": 1.0},
    "ar1": {"mean": 50.0, "persistence": 0.9, "sigma": 1.0},
    "sine_plus_trend": {"mean": 50.0, "amplitude": 4.0, "period": 45.0, "slope": 0.05},
}


class TruthModel(str, enum.Enum):
    RANDOM_WALK = "random_walk"
    AR1 = "ar1"
    SINE_PLUS_TREND = "sine_plus_trend"


@dataclass(frozen=True)
class SyntheticScenario:
    n_days: int = 120
    truth_model: TruthModel = TruthModel.AR1
    truth_params: Mapping[str, float] = field(default_factory=dict)
    lead_days: int = 14
    lag_days: int = 2
    affine_A: float = 1.0
    affine_b: float = 0.0
    noise_A: float = 2.0
    noise_B: float = 3.0
    obs_B_density: float = 0.6
    seed: int = 0
    start: date = date(2016, 3, 1)
    polls_per_day: int = 1
    # None keeps observer A continuous; an integer quantises it through tweet counts
    tweets_per_day: int | None = 10000
    poll_span_days: int = 3
    compile_days: int = 1

    def __post_init__(self):
        object.__setattr__(self, "truth_model", TruthModel(self.truth_model))
        params = dict(DEFAULT_TRUTH_PARAMS[self.truth_model.value])
        unknown = set(self.truth_params) - set(params)
        if unknown:
            raise ValidationError(f"unknown truth parameters {sorted(unknown)}")
        params.update({k: float(v) for k, v in self.truth_params.items()})
        object.__setattr__(self, "truth_params", params)
        if min(self.lead_days, self.lag_days) < 0:
            raise ValidationError("lead_days and lag_days must be non-negative")
        if self.n_days <= self.lead_days + self.lag_days + 30:
            raise ValidationError("n_days must exceed lead_days + lag_days + 30")
        if min(self.noise_A, self.noise_B) < 0:
            raise ValidationError("noise levels must be non-negative")
        if not 0 < self.obs_B_density <= 1:
            raise ValidationError("obs_B_density must lie in (0, 1]")
        if self.polls_per_day < 1:
            raise ValidationError("polls_per_day must be at least 1")
        if self.tweets_per_day is not None and self.tweets_per_day < 1:
            raise ValidationError("tweets_per_day must be positive")
        if not 0 <= self.compile_days <= self.poll_span_days:
            raise ValidationError("need 0 <= compile_days <= poll_span_days")

    @classmethod
    def from_mapping(cls, raw: Mapping[str, str]) -> "SyntheticScenario":
        """Build from flat string key-values; ``truth_<name>`` keys fill ``truth_params``."""
        kwargs: dict = {}
        truth: dict[str, float] = {}
        types = {f.name: f.type for f in fields(cls)}
        for key, value in raw.items():
            if key == "truth_model":
                kwargs[key] = value.strip()
            elif key.startswith("truth_"):
                truth[key[len("truth_"):]] = float(value)
            elif key not in types:
                raise ValidationError(f"unknown scenario key {key!r}")
            elif key == "start":
                kwargs[key] = date.fromisoformat(value.strip())
            elif key == "tweets_per_day":
                kwargs[key] = None if value.strip().lower() in ("", "none") else int(value)
            elif "int" in str(types[key]):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(truth_params=truth, **kwargs)


@dataclass(frozen=True, eq=False)
class SyntheticData:
    scenario: SyntheticScenario
    truth: DailySeries
    observer_a: DailySeries
    observer_b: DailySeries
    polls: tuple[PollRecord, ...]
    tweets: tuple[TweetCount, ...]
    clamped: int


def _round6(values) -> np.ndarray:
    # string rounding so that six-decimal CSV output parses back bit-identically
    return np.array([float(f"{v:.6f}") for v in np.atleast_1d(values)])


def _latent(sc: SyntheticScenario, length: int, rng: np.random.Generator) -> np.ndarray:
    p = sc.truth_params
    if sc.truth_model is TruthModel.RANDOM_WALK:
        steps = rng.normal(0.0, p["sigma"], length)
        steps[0] = 0.0
        return p["mean"] + np.cumsum(steps)
    if sc.truth_model is TruthModel.AR1:
        phi, sigma = p["persistence"], p["sigma"]
        if not abs(phi) < 1:
            raise ValidationError("ar1 persistence must lie in (-1, 1)")
        eps = rng.normal(0.0, sigma, length)
        x = np.empty(length)
        x[0] = p["mean"] + eps[0] / math.sqrt(1.0 - phi * phi)
        for t in range(1, length):
            x[t] = p["mean"] + phi * (x[t - 1] - p["mean"]) + eps[t]
        return x
    t = np.arange(length, dtype=float)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    return (
        p["mean"]
        + p["slope"] * (t - length / 2.0)
        + p["amplitude"] * np.sin(2.0 * math.pi * t / p["period"] + phase)
    )


def generate(scenario: SyntheticScenario) -> SyntheticData:
    """Draw truth and both observers for ``scenario``.

    On day ``d``: ``A(d) = affine_A * truth(d + lead) + affine_b + noise`` and
    each report of ``B(d)`` is ``truth(d - lag) + noise``.
    """
    sc = scenario
    rng = np.random.default_rng(sc.seed)
    n, lead, lag = sc.n_days, sc.lead_days, sc.lag_days

    # latent[j] is the truth at day j - lag
    latent = _latent(sc, n + lead + lag, rng)
    lo, hi = TRUTH_BOUNDS
    clamped = int(((latent < lo) | (latent > hi)).sum())
    latent = _round6(np.clip(latent, lo, hi))
    truth = DailySeries(sc.start, latent[lag : lag + n])

    a = sc.affine_A * latent[lead + lag :] + sc.affine_b + sc.noise_A * rng.standard_normal(n)
    clamped += int(((a < 0) | (a > 100)).sum())
    a = np.clip(a, 0.0, 100.0)
    tweets: list[TweetCount] = []
    if sc.tweets_per_day is None:
        a = _round6(a)
    else:
        total = sc.tweets_per_day
        leave = np.rint(total * a / 100.0).astype(int)
        for d in range(n):
            day = sc.start + timedelta(days=d)
            tweets.append(TweetCount(day, Camp.LEAVE, int(leave[d])))
            tweets.append(TweetCount(day, Camp.REMAIN, int(total - leave[d])))
        a = np.array([100.0 * int(c) / total for c in leave])
    observer_a = DailySeries(sc.start, a)

    observed = rng.random(n) < sc.obs_B_density
    noise = sc.noise_B * rng.standard_normal((n, sc.polls_per_day))
    modes = (Mode.ONLINE, Mode.PHONE)
    polls: list[PollRecord] = []
    for d in np.flatnonzero(observed):
        release = sc.start + timedelta(days=int(d))
        for k in range(sc.polls_per_day):
            share = float(_round6(np.clip(latent[d] + noise[d, k], 0.0, 100.0))[0])
            polls.append(
                PollRecord(
                    pollster=f"synth-{k + 1}",
                    fieldwork_start=release - timedelta(days=sc.poll_span_days),
                    fieldwork_end=release - timedelta(days=sc.compile_days),
                    release_date=release,
                    remain_share=float(_round6(100.0 - share)[0]),
                    leave_share=share,
                    undecided_share=0.0,
                    mode=modes[(int(d) + k) % 2],
                )
            )
    end = sc.start + timedelta(days=n - 1)
    if polls:
        observer_b = poll_series(polls, Camp.LEAVE, start=sc.start, end=end)
    else:
        observer_b = DailySeries(sc.start, np.full(n, np.nan))
    return SyntheticData(sc, truth, observer_a, observer_b, tuple(polls), tuple(tweets), clamped)


def true_errors(estimate: DailySeries, truth: DailySeries, mask=None) -> tuple[float, float]:
    """Sample mean and variance of ``estimate - truth``, optionally on ``mask`` days only."""
    if estimate.start != truth.start or len(estimate) != len(truth):
        raise ValidationError("estimate and truth are misaligned")
    err = estimate.values - truth.values
    if mask is not None:
        err = err[np.asarray(mask, dtype=bool)]
    if np.isnan(err).any():
        raise ValidationError("estimate and truth must be complete on the evaluated days")
    if err.size < 2:
        raise ValidationError("need at least 2 days to estimate error variance")
    return float(err.mean()), float(err.var(ddof=1))


def with_seed(scenario: SyntheticScenario, seed: int) -> SyntheticScenario:
    return replace(scenario, seed=seed)
