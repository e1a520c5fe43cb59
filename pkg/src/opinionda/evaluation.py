"""Scoring an assimilated series against its two inputs, plus residual checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import stats

from .alignment import pearson
from .errors import NumericalError, ValidationError
from .timeseries import DailySeries, complete_case_pairs

MIN_RESIDUALS = 8


def _pairs(a, b) -> np.ndarray:
    if isinstance(a, DailySeries) and isinstance(b, DailySeries):
        return complete_case_pairs(a, b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"length mismatch: {a.shape} vs {b.shape}")
    keep = ~np.isnan(a) & ~np.isnan(b)
    if not keep.any():
        raise ValidationError("no common support between the two series")
    return np.column_stack([a[keep], b[keep]])


def mse(a, b) -> float:
    """Mean squared difference over complete-case pairs.

    Accepts two :class:`DailySeries` (paired by date) or two equal-length
    sequences where ``NaN`` marks a missing value.
    """
    p = _pairs(a, b)
    return float(np.mean((p[:, 0] - p[:, 1]) ** 2))


@dataclass(frozen=True)
class ResidualStats:
    n: int
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float
    jarque_bera: float
    jarque_bera_pvalue: float
    biased: bool
    degenerate: bool
    hist_counts: tuple[int, ...]
    hist_edges: tuple[float, ...]


def residual_diagnostics(prior: DailySeries, obs: DailySeries, H: float = 1.0) -> ResidualStats:
    """Statistics of ``z - H x`` on days where both series are present.

    ``biased`` is set when ``|mean| > 2 std / sqrt(n)``; a zero spread with a
    non-zero mean counts as biased and is marked ``degenerate``.  The
    histogram uses Sturges' bin count.
    """
    p = complete_case_pairs(prior, obs)
    r = p[:, 1] - H * p[:, 0]
    n = len(r)
    if n < MIN_RESIDUALS:
        raise ValidationError(f"too few residuals: {n} < {MIN_RESIDUALS}")
    mean = float(r.mean())
    std = float(r.std(ddof=1))
    degenerate = std == 0.0
    if degenerate:
        skew = kurt = jb = jb_p = float("nan")
    else:
        skew = float(stats.skew(r))
        kurt = float(stats.kurtosis(r, fisher=True))
        jb_res = stats.jarque_bera(r)
        jb, jb_p = float(jb_res.statistic), float(jb_res.pvalue)
    biased = abs(mean) > 2.0 * std / math.sqrt(n)
    bins = int(math.ceil(math.log2(n))) + 1
    counts, edges = np.histogram(r, bins=bins)
    return ResidualStats(
        n=n,
        mean=mean,
        std=std,
        skewness=skew,
        excess_kurtosis=kurt,
        jarque_bera=jb,
        jarque_bera_pvalue=jb_p,
        biased=bool(biased),
        degenerate=degenerate,
        hist_counts=tuple(int(c) for c in counts),
        hist_edges=tuple(float(e) for e in edges),
    )


@dataclass(frozen=True)
class EvalReport:
    mse_vs_polls: float
    mse_vs_twitter: float
    corr_vs_polls: float
    corr_vs_twitter: float
    residual_mean: float
    residual_std: float
    residual_skewness: float
    residual_excess_kurtosis: float
    gain: float
    residuals: ResidualStats | None = None

    def as_dict(self, digits: int = 6) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "residuals":
                continue
            out[f.name] = _rounded(getattr(self, f.name), digits)
        if self.residuals is not None:
            res = asdict(self.residuals)
            out["residuals"] = {k: _rounded(v, digits) for k, v in res.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    @staticmethod
    def csv_header() -> list[str]:
        return [f.name for f in fields(EvalReport) if f.name != "residuals"]

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, name)) for name in self.csv_header()]


def _rounded(v, digits):
    if isinstance(v, bool) or isinstance(v, int):
        return v
    if isinstance(v, float):
        return None if math.isnan(v) else round(v, digits)
    if isinstance(v, (tuple, list)):
        return [_rounded(x, digits) for x in v]
    return v


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else f"{v:.6f}"


def _corr_or_nan(a: DailySeries, b: DailySeries) -> float:
    try:
        return pearson(complete_case_pairs(a, b))
    except (NumericalError, ValidationError):
        return float("nan")


def full_report(
    assimilated: DailySeries,
    polls_shifted: DailySeries,
    twitter_shifted: DailySeries,
    gain: float,
    H: float = 1.0,
) -> EvalReport:
    """Distances and correlations of the assimilated series to each input,
    plus residuals of the polls against the shifted prior."""
    res = residual_diagnostics(twitter_shifted, polls_shifted, H)
    return EvalReport(
        mse_vs_polls=mse(assimilated, polls_shifted),
        mse_vs_twitter=mse(assimilated, twitter_shifted),
        corr_vs_polls=_corr_or_nan(assimilated, polls_shifted),
        corr_vs_twitter=_corr_or_nan(assimilated, twitter_shifted),
        residual_mean=res.mean,
        residual_std=res.std,
        residual_skewness=res.skewness,
        residual_excess_kurtosis=res.excess_kurtosis,
        gain=gain,
        residuals=res,
    )
