"""CSV readers/writers for tweets, polls and daily series, and flat config files."""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .timeseries import DailySeries, PollRecord, TweetCount

TWEET_COLUMNS = ["date", "camp", "count"]
POLL_COLUMNS = [
    "pollster",
    "fieldwork_start",
    "fieldwork_end",
    "release_date",
    "remain",
    "leave",
    "undecided",
    "mode",
]


def fmt(v: float) -> str:
    """Fixed six-decimal rendering; missing values become an empty field."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{float(v):.6f}"


@dataclass
class ParseReport:
    rows: int = 0
    accepted: int = 0
    excluded: int = 0
    rejected: list[dict] = field(default_factory=list)

    @property
    def reject_fraction(self) -> float:
        return len(self.rejected) / self.rows if self.rows else 0.0

    def as_dict(self) -> dict:
        return {
            "rows": self.rows,
            "accepted": self.accepted,
            "excluded_before_data_start": self.excluded,
            "rejected": self.rejected,
        }


def _read_rows(path: Path, columns: Sequence[str]) -> list[tuple[int, dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: empty file")
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{path}: missing columns {missing}")
        # line numbers count the header as line 1
        return [(i + 2, row) for i, row in enumerate(reader)]


def read_tweets(path, data_start: date | None = None) -> tuple[list[TweetCount], ParseReport]:
    report = ParseReport()
    out = []
    for line, row in _read_rows(Path(path), TWEET_COLUMNS):
        report.rows += 1
        try:
            raw_count = row["count"].strip()
            if not raw_count.lstrip("-").isdigit():
                raise ValidationError(f"count {raw_count!r} is not an integer")
            rec = TweetCount(date.fromisoformat(row["date"].strip()), row["camp"], int(raw_count))
        except (ValueError, AttributeError) as exc:
            report.rejected.append({"line": line, "reason": str(exc)})
            continue
        if data_start is not None and rec.date < data_start:
            report.excluded += 1
            continue
        report.accepted += 1
        out.append(rec)
    return out, report


def read_polls(path, data_start: date | None = None) -> tuple[list[PollRecord], ParseReport]:
    report = ParseReport()
    out = []
    for line, row in _read_rows(Path(path), POLL_COLUMNS):
        report.rows += 1
        try:
            rec = PollRecord(
                pollster=row["pollster"].strip(),
                fieldwork_start=date.fromisoformat(row["fieldwork_start"].strip()),
                fieldwork_end=date.fromisoformat(row["fieldwork_end"].strip()),
                release_date=date.fromisoformat(row["release_date"].strip()),
                remain_share=float(row["remain"]),
                leave_share=float(row["leave"]),
                undecided_share=float(row["undecided"]),
                mode=row["mode"],
            )
        except (ValueError, TypeError, AttributeError) as exc:
            report.rejected.append({"line": line, "reason": str(exc)})
            continue
        if data_start is not None and rec.release_date < data_start:
            report.excluded += 1
            continue
        report.accepted += 1
        out.append(rec)
    return out, report


def write_tweets(path, records: Iterable[TweetCount]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TWEET_COLUMNS)
        for r in records:
            w.writerow([r.date.isoformat(), r.camp.value, r.count])


def write_polls(path, polls: Iterable[PollRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POLL_COLUMNS)
        for p in polls:
            w.writerow(
                [
                    p.pollster,
                    p.fieldwork_start.isoformat(),
                    p.fieldwork_end.isoformat(),
                    p.release_date.isoformat(),
                    fmt(p.remain_share),
                    fmt(p.leave_share),
                    fmt(p.undecided_share),
                    p.mode.value,
                ]
            )


def write_series(path, s: DailySeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "value"])
        for d, v in zip(s.dates, s.values):
            w.writerow([d.isoformat(), fmt(v)])


def read_series(path, column: str = "value") -> DailySeries:
    """Read one column of a ``date,...`` CSV; empty cells are missing days."""
    values = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "date" not in reader.fieldnames:
            raise ValidationError(f"{path}: expected a 'date' column")
        if column not in reader.fieldnames:
            raise ValidationError(f"{path}: no column {column!r}")
        dates = []
        for row in reader:
            d = date.fromisoformat(row["date"])
            dates.append(d)
            cell = row[column].strip()
            if cell:
                values[d] = float(cell)
    if not dates:
        raise ValidationError(f"{path}: no rows")
    return DailySeries.from_mapping(values, start=min(dates), end=max(dates))


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def read_flat_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file (``#`` comments allowed)."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if len(parser.sections()) != 1:
        raise ValidationError(f"{path}: sections are not allowed in a flat config")
    return dict(parser["config"])


