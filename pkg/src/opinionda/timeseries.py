"""Date-indexed daily series and the preprocessing steps applied to raw inputs.

A :class:`DailySeries` holds one float slot per consecutive calendar day,
with ``NaN`` marking a missing day.  Values are percentages (0-100) so that
variances come out in %^2.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError

SHARE_SUM_TOLERANCE = 0.5


class Camp(str, enum.Enum):
    LEAVE = "leave"
    REMAIN = "remain"

    @classmethod
    def parse(cls, value: "str | Camp") -> "Camp":
        if isinstance(value, Camp):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown camp {value!r}") from None


class Mode(str, enum.Enum):
    ONLINE = "online"
    PHONE = "phone"

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown poll mode {value!r}") from None


@dataclass(frozen=True)
class TweetCount:
    """Number of classified tweets supporting one camp on one day."""

    date: date
    camp: Camp
    count: int

    def __post_init__(self):
        object.__setattr__(self, "camp", Camp.parse(self.camp))
        if isinstance(self.count, bool) or int(self.count) != self.count:
            raise ValidationError(f"tweet count must be an integer, got {self.count!r}")
        if self.count < 0:
            raise ValidationError(f"negative tweet count {self.count} on {self.date}")
        object.__setattr__(self, "count", int(self.count))


@dataclass(frozen=True)
class PollRecord:
    """One released survey."""

    pollster: str
    fieldwork_start: date
    fieldwork_end: date
    release_date: date
    remain_share: float
    leave_share: float
    undecided_share: float
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if not self.fieldwork_start <= self.fieldwork_end <= self.release_date:
            raise ValidationError(
                "date order: expected fieldwork_start <= fieldwork_end <= release_date"
            )
        shares = (self.remain_share, self.leave_share, self.undecided_share)
        for s in shares:
            if not np.isfinite(s) or not 0.0 <= s <= 100.0:
                raise ValidationError(f"share out of range: {s!r}")
        total = sum(shares)
        if abs(total - 100.0) > SHARE_SUM_TOLERANCE:
            raise ValidationError(f"share sum {total:g} differs from 100")

    def share(self, camp: "Camp | str") -> float:
        camp = Camp.parse(camp)
        return self.leave_share if camp is Camp.LEAVE else self.remain_share

    @property
    def fieldwork_to_release_days(self) -> int:
        return (self.release_date - self.fieldwork_start).days


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Daily values starting at ``start``; ``NaN`` marks a missing day.

    Instances are immutable: the value buffer is copied and made read-only.
    """

    start: date
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 1:
            raise ValidationError("series values must be one-dimensional")
        if np.isinf(arr).any():
            raise ValidationError("series values must be finite or NaN")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_mapping(
        cls,
        mapping: Mapping[date, float],
        start: date | None = None,
        end: date | None = None,
    ) -> "DailySeries":
        if not mapping and (start is None or end is None):
            raise ValidationError("cannot build a series from an empty mapping without bounds")
        start = min(mapping) if start is None else start
        end = max(mapping) if end is None else end
        n = (end - start).days + 1
        if n < 0:
            raise ValidationError("end precedes start")
        values = np.full(n, np.nan)
        for d, v in mapping.items():
            i = (d - start).days
            if 0 <= i < n:
                values[i] = v
        return cls(start, values)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DailySeries):
            return NotImplemented
        return self.start == other.start and np.array_equal(
            self.values, other.values, equal_nan=True
        )

    def __repr__(self) -> str:
        return (
            f"DailySeries(start={self.start.isoformat()}, days={len(self)}, "
            f"present={self.n_present})"
        )

    @property
    def end(self) -> date:
        """Date of the last slot."""
        return self.start + timedelta(days=len(self) - 1)

    @property
    def dates(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range(len(self))]

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    @property
    def is_complete(self) -> bool:
        return len(self) > 0 and bool(self.present.all())

    def index_of(self, d: date) -> int:
        return (d - self.start).days

    def get(self, d: date) -> float:
        """Value on day ``d``, ``NaN`` if missing or outside the series."""
        i = self.index_of(d)
        if 0 <= i < len(self):
            return float(self.values[i])
        return float("nan")

    def with_values(self, values) -> "DailySeries":
        return DailySeries(self.start, values)

    def reindex(self, start: date, end: date) -> "DailySeries":
        """Series over ``[start, end]``; days outside the original are missing."""
        n = (end - start).days + 1
        if n < 0:
            raise ValidationError("end precedes start")
        out = np.full(n, np.nan)
        offset = (self.start - start).days
        lo = max(0, offset)
        hi = min(n, offset + len(self))
        if hi > lo:
            out[lo:hi] = self.values[lo - offset : hi - offset]
        return DailySeries(start, out)

    def trim(self) -> "DailySeries":
        """Drop leading and trailing missing days."""
        idx = np.flatnonzero(self.present)
        if idx.size == 0:
            return DailySeries(self.start, [])
        return DailySeries(
            self.start + timedelta(days=int(idx[0])), self.values[idx[0] : idx[-1] + 1]
        )

    def check_percent(self) -> "DailySeries":
        """Raise unless every present value lies in [0, 100]."""
        v = self.values[self.present]
        if v.size and (v.min() < 0.0 or v.max() > 100.0):
            raise ValidationError("series values outside [0, 100]")
        return self


def aggregate_tweets(
    records: Iterable[TweetCount],
    camp: "Camp | str",
    start: date | None = None,
    end: date | None = None,
) -> DailySeries:
    """Daily share (%) of one camp among all classified tweets.

    Counts for the same day and camp are summed.  Days without tweets from
    either camp are missing.  If ``start``/``end`` are given, every record
    must fall inside that window and the series spans it exactly.
    """
    camp = Camp.parse(camp)
    records = list(records)
    if not records:
        raise ValidationError("no records")
    totals: dict[date, list[int]] = defaultdict(lambda: [0, 0])
    for rec in records:
        if not isinstance(rec, TweetCount):
            rec = TweetCount(*rec)
        if (start is not None and rec.date < start) or (end is not None and rec.date > end):
            raise ValidationError(f"tweet record dated {rec.date} outside the declared window")
        totals[rec.date][0 if rec.camp is Camp.LEAVE else 1] += rec.count
    shares = {}
    for d, (leave, remain) in totals.items():
        total = leave + remain
        if total > 0:
            shares[d] = 100.0 * (leave if camp is Camp.LEAVE else remain) / total
    return DailySeries.from_mapping(
        shares,
        start=min(totals) if start is None else start,
        end=max(totals) if end is None else end,
    )


def poll_series(
    polls: Iterable[PollRecord],
    camp: "Camp | str",
    start: date | None = None,
    end: date | None = None,
) -> DailySeries:
    """Daily poll share of ``camp`` indexed by release date.

    Polls released on the same day are averaged into one value.
    """
    by_day = same_day_groups(list(polls), camp)
    if not by_day:
        raise ValidationError("no polls")
    means = {d: float(np.mean(v)) for d, v in by_day.items()}
    return DailySeries.from_mapping(means, start=start, end=end)


def interpolate_linear(s: DailySeries) -> DailySeries:
    """Fill interior gaps by straight lines between bracketing values.

    The result covers the first through the last present day; leading and
    trailing gaps are dropped, never extrapolated.
    """
    if s.n_present < 2:
        raise ValidationError("cannot interpolate: fewer than two present values")
    t = s.trim()
    if t.is_complete:
        return t
    x = np.arange(len(t))
    mask = t.present
    filled = np.interp(x, x[mask], t.values[mask])
    filled[mask] = t.values[mask]
    return t.with_values(filled)


def shift_days(s: DailySeries, delta: int) -> DailySeries:
    """Report the value observed on day ``d`` at day ``d + delta``."""
    return DailySeries(s.start + timedelta(days=int(delta)), s.values)


def complete_case_pairs(a: DailySeries, b: DailySeries) -> np.ndarray:
    """``(n, 2)`` array of ``(a, b)`` values on days where both are present."""
    start = max(a.start, b.start)
    end = min(a.end, b.end)
    if end >= start:
        va = a.reindex(start, end).values
        vb = b.reindex(start, end).values
        both = ~np.isnan(va) & ~np.isnan(vb)
        if both.any():
            return np.column_stack([va[both], vb[both]])
    raise ValidationError("no common support between the two series")


def restrict(s: DailySeries, start: date | None, end: date | None) -> DailySeries:
    """Keep only days within ``[start, end]`` (either bound optional)."""
    lo = s.start if start is None else max(start, s.start)
    hi = s.end if end is None else min(end, s.end)
    if hi < lo:
        return DailySeries(lo, [])
    return s.reindex(lo, hi)


def same_day_groups(
    polls: Sequence[PollRecord], camp: "Camp | str"
) -> dict[date, list[float]]:
    """Camp shares grouped by release date."""
    camp = Camp.parse(camp)
    groups: dict[date, list[float]] = defaultdict(list)
    for p in polls:
        groups[p.release_date].append(p.share(camp))
    return dict(groups)
