"""Lag estimation between a leading source series and a lagging target series.

The source (social-media share) is shifted forward by an integer number of
days and optionally rescaled, ``A * source(d - t_d) + b``, to best match the
target (poll share).  Candidate shifts form an exhaustive integer grid and
``(A, b)`` are the ordinary least squares coefficients at each shift.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import asdict, dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .timeseries import DailySeries, PollRecord, complete_case_pairs, restrict, shift_days

DEFAULT_MAX_SHIFT = 23


class Criterion(str, enum.Enum):
    RMSE = "rmse"
    CORRELATION = "correlation"

    @classmethod
    def parse(cls, value: "str | Criterion") -> "Criterion":
        if isinstance(value, Criterion):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown criterion {value!r}") from None


@dataclass(frozen=True)
class AlignmentFit:
    """Outcome of one fitting experiment.

    ``criterion_value`` is the optimised quantity; ``rmse`` and
    ``correlation`` are both reported at the chosen shift regardless of
    which one was optimised.
    """

    t_d: int
    A: float
    b: float
    criterion_value: float
    criterion: Criterion
    rescaled: bool
    rmse: float
    correlation: float
    n_pairs: int

    def as_dict(self) -> dict:
        d = asdict(self)
        d["criterion"] = self.criterion.value
        return d


@dataclass(frozen=True)
class LagDecomposition:
    total_lag: int
    source_lead: int
    obs_lag: int

    def __post_init__(self):
        if min(self.total_lag, self.source_lead, self.obs_lag) < 0:
            raise ValidationError("lag components must be non-negative")
        if self.source_lead + self.obs_lag != self.total_lag:
            raise ValidationError("source_lead + obs_lag must equal total_lag")


def pearson(pairs) -> float:
    """Sample Pearson correlation of the two columns of ``pairs``."""
    p = np.asarray(pairs, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValidationError("pairs must have shape (n, 2)")
    if len(p) < 2:
        raise ValidationError("pearson needs at least 2 pairs")
    x = p[:, 0] - p[:, 0].mean()
    y = p[:, 1] - p[:, 1].mean()
    sxx = np.dot(x, x)
    syy = np.dot(y, y)
    if sxx == 0.0 or syy == 0.0:
        raise NumericalError("zero variance")
    r = np.dot(x, y) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def rmse(a, b) -> float:
    """Root mean squared difference between two equal-length sequences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValidationError("rmse needs at least one value")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = np.dot(dx, dx)
    if sxx <= 1e-12 * len(x) * (1.0 + xm * xm):
        raise NumericalError("rank deficient: source window is constant")
    A = np.dot(dx, y - ym) / sxx
    return float(A), float(ym - A * xm)


def _candidate_pairs(source, target, t_d, window):
    shifted = restrict(shift_days(source, t_d), *window)
    try:
        return complete_case_pairs(shifted, target)
    except ValidationError:
        return None


def _fit(source, target, max_shift, criterion, window, rescale) -> AlignmentFit:
    criterion = Criterion.parse(criterion)
    if max_shift < 0:
        raise ValidationError("max_shift must be non-negative")
    window = window or (None, None)
    best = None
    degenerate = 0
    for t_d in range(max_shift + 1):
        pairs = _candidate_pairs(source, target, t_d, window)
        if pairs is None:
            continue
        x, y = pairs[:, 0], pairs[:, 1]
        try:
            A, b = _ols(x, y) if rescale else (1.0, 0.0)
            corr = pearson(pairs) if len(pairs) >= 2 else float("nan")
        except NumericalError:
            if rescale or criterion is Criterion.CORRELATION:
                degenerate += 1
                continue
            A, b, corr = 1.0, 0.0, float("nan")
        err = rmse(A * x + b, y)
        if criterion is Criterion.RMSE:
            score, value = err, err
        else:
            if math.isnan(corr):
                continue
            score, value = -corr, corr
        # strict improvement keeps the smallest t_d among ties
        if best is None or score < best[0]:
            best = (score, AlignmentFit(t_d, A, b, value, criterion, rescale, err, corr, len(pairs)))
    if best is None:
        if degenerate:
            raise NumericalError("rank deficient: every candidate shift is degenerate")
        raise ValidationError("no candidate shift overlaps the target")
    return best[1]


def fit_shift(
    source: DailySeries,
    target: DailySeries,
    max_shift: int = DEFAULT_MAX_SHIFT,
    criterion: "Criterion | str" = Criterion.RMSE,
    window: tuple[date | None, date | None] | None = None,
) -> AlignmentFit:
    """Best forward shift of ``source`` onto ``target`` without rescaling.

    Criteria are evaluated on complete-case pairs inside ``window`` (dates of
    the shifted source).  Shifts with no overlap are skipped.
    """
    return _fit(source, target, max_shift, criterion, window, rescale=False)


def fit_shift_rescale(
    source: DailySeries,
    target: DailySeries,
    max_shift: int = DEFAULT_MAX_SHIFT,
    criterion: "Criterion | str" = Criterion.RMSE,
    window: tuple[date | None, date | None] | None = None,
) -> AlignmentFit:
    """Best forward shift with an affine rescale fitted by least squares.

    For the correlation criterion the shift maximises correlation and the
    reported ``(A, b)`` are the least squares coefficients at that shift.
    """
    return _fit(source, target, max_shift, criterion, window, rescale=True)


def run_experiments(
    smoothed_source: DailySeries,
    target: DailySeries,
    max_shift: int = DEFAULT_MAX_SHIFT,
    window: tuple[date | None, date | None] | None = None,
) -> list[AlignmentFit]:
    """The four fitting experiments, ordered rescale/rmse, rescale/correlation,
    shift/rmse, shift/correlation."""
    return [
        fit_shift_rescale(smoothed_source, target, max_shift, Criterion.RMSE, window),
        fit_shift_rescale(smoothed_source, target, max_shift, Criterion.CORRELATION, window),
        fit_shift(smoothed_source, target, max_shift, Criterion.RMSE, window),
        fit_shift(smoothed_source, target, max_shift, Criterion.CORRELATION, window),
    ]


def consensus_lag(fits: Sequence[AlignmentFit]) -> int:
    """Most frequent ``t_d`` across experiments; ties go to the smaller lag."""
    if not fits:
        raise ValidationError("no fits")
    counts = Counter(f.t_d for f in fits)
    return min(counts, key=lambda t: (-counts[t], t))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def observation_lag(mean_release_span: float, compile_days: float) -> int:
    """Days by which a poll's release trails the midpoint of its fieldwork.

    Fieldwork runs from its start until ``compile_days`` before release, so
    the midpoint sits ``(span + compile_days) / 2`` days before release.
    """
    if compile_days < 0:
        raise ValidationError("compile_days must be non-negative")
    if mean_release_span < compile_days:
        raise ValidationError("mean fieldwork-to-release span is shorter than compile_days")
    return _round_half_up((mean_release_span + compile_days) / 2.0)


def decompose_lag(
    total_lag: int, polls: Sequence[PollRecord], compile_days: float = 1
) -> LagDecomposition:
    """Split the source-to-poll lag into the source lead and the poll lag."""
    if total_lag < 0:
        raise ValidationError("total_lag must be non-negative")
    if not polls:
        raise ValidationError("no polls")
    span = float(np.mean([p.fieldwork_to_release_days for p in polls]))
    obs_lag = observation_lag(span, compile_days)
    if obs_lag > total_lag:
        raise ValidationError(
            f"inconsistent decomposition: poll lag {obs_lag} exceeds total lag {total_lag}"
        )
    return LagDecomposition(total_lag, total_lag - obs_lag, obs_lag)
