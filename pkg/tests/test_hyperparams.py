from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, strategies as st

from opinionda.errors import ValidationError
from opinionda.hyperparams import (
    GAIN_PRESETS,
    Method,
    ParamEstimate,
    estimate_Pb_snapshots,
    estimate_R_same_day,
    gain_bounds,
    preset_background,
)
from opinionda.synthetic import SyntheticScenario, generate

from conftest import D0, poll


def two_pass_variance(xs):
    n = len(xs)
    mean = sum(xs) / n
    return sum((x - mean) ** 2 for x in xs) / (n - 1)


class TestSameDayR:
    def test_two_polls(self):
        est = estimate_R_same_day([poll(D0, 48), poll(D0, 52)], "leave")
        assert est.value == pytest.approx(8.0)
        assert est.method is Method.SAME_DAY_POLLS and est.sample_size == 2

    def test_pooled(self):
        d1 = D0 + timedelta(1)
        polls = [poll(D0, 48), poll(D0, 52), poll(d1, 40), poll(d1, 43), poll(d1, 46)]
        # (8 + 18) / (1 + 2)
        assert estimate_R_same_day(polls, "leave").value == pytest.approx(26 / 3)

    def test_single_poll_days_ignored(self):
        base = [poll(D0, 48), poll(D0, 52)]
        extra = [poll(D0 + timedelta(i), 30 + i) for i in range(2, 9)]
        assert estimate_R_same_day(base + extra, "leave").value == estimate_R_same_day(base, "leave").value

    def test_not_estimable(self):
        with pytest.raises(ValidationError, match="R not estimable"):
            estimate_R_same_day([poll(D0, 48), poll(D0 + timedelta(1), 50)], "leave")

    def test_camps_use_their_share(self):
        polls = [poll(D0, 48, remain=42, undecided=10), poll(D0, 52, remain=40, undecided=8)]
        assert estimate_R_same_day(polls, "remain").value == pytest.approx(2.0)

    def test_synthetic_noise_three(self):
        sc = SyntheticScenario(noise_B=3.0, polls_per_day=2, obs_B_density=0.5, n_days=120, seed=7)
        d = generate(sc)
        days = {p.release_date for p in d.polls}
        assert len(days) >= 30
        est = estimate_R_same_day(d.polls, "leave").value
        assert 6.0 <= est <= 12.5


class TestSnapshots:
    def test_constant(self):
        assert estimate_Pb_snapshots([42.0] * 10).value == 0.0

    def test_hand_value(self):
        est = estimate_Pb_snapshots([40, 50, 60])
        assert est.value == pytest.approx(100.0)
        assert est.sample_size == 3 and est.method is Method.SNAPSHOT_COVARIANCE

    def test_too_few(self):
        with pytest.raises(ValidationError):
            estimate_Pb_snapshots([1.0])

    @given(st.lists(st.floats(0, 100), min_size=2, max_size=200))
    def test_matches_two_pass(self, xs):
        assert estimate_Pb_snapshots(xs).value == pytest.approx(two_pass_variance(xs), abs=1e-9)


class TestGainBounds:
    R = ParamEstimate.manual(13.08)

    def test_preset_span(self):
        lo, hi = gain_bounds(self.R, ParamEstimate.manual(9.85), ParamEstimate.manual(266.06))
        assert lo == pytest.approx(0.43, abs=0.005)
        assert hi == pytest.approx(0.953, abs=0.003)

    def test_mid(self):
        lo, _ = gain_bounds(self.R, ParamEstimate.manual(45), ParamEstimate.manual(266.06))
        assert lo == pytest.approx(45 / 58.08) == pytest.approx(0.775, abs=1e-3)

    def test_degenerate_warns(self):
        pb = ParamEstimate.manual(20.0)
        with pytest.warns(UserWarning, match="degenerate"):
            lo, hi = gain_bounds(self.R, pb, pb)
        assert lo == hi

    @given(st.floats(1, 100), st.floats(1, 100), st.floats(0, 50), st.floats(0, 50))
    def test_monotone_interval(self, a, b, shrink, grow):
        lo_pb, hi_pb = sorted((a, b))
        inner = gain_bounds(self.R, ParamEstimate.manual(lo_pb), ParamEstimate.manual(hi_pb + 1e-9))
        outer = gain_bounds(
            self.R,
            ParamEstimate.manual(max(lo_pb - shrink, 0.01)),
            ParamEstimate.manual(hi_pb + 1e-9 + grow),
        )
        assert outer[0] <= inner[0] and outer[1] >= inner[1]


def test_presets():
    assert GAIN_PRESETS == {"high": 266.06, "mid": 45.0, "low": 10.0}
    assert preset_background("mid").method is Method.MANUAL
    with pytest.raises(ValidationError):
        preset_background("extreme")


def test_param_estimate_invariants():
    with pytest.raises(ValidationError):
        ParamEstimate(-1.0, Method.MANUAL, 0)
    with pytest.raises(ValidationError):
        ParamEstimate(1.0, Method.SAME_DAY_POLLS, 1)
