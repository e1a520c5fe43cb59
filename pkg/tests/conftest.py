import sys
from datetime import date

import numpy as np
import pytest

from opinionda.timeseries import DailySeries, Mode, PollRecord

D0 = date(2016, 3, 1)


def series(values, start=D0):
    return DailySeries(start, [np.nan if v is None else v for v in values])


def poll(release, leave, remain=None, undecided=0.0, span=3, compile_days=1, pollster="p"):
    from datetime import timedelta

    remain = 100.0 - leave - undecided if remain is None else remain
    return PollRecord(
        pollster=pollster,
        fieldwork_start=release - timedelta(days=span),
        fieldwork_end=release - timedelta(days=compile_days),
        release_date=release,
        remain_share=remain,
        leave_share=leave,
        undecided_share=undecided,
        mode=Mode.ONLINE,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20160623)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
