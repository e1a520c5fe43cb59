from datetime import timedelta

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from opinionda.alignment import (
    Criterion,
    LagDecomposition,
    consensus_lag,
    decompose_lag,
    fit_shift,
    fit_shift_rescale,
    observation_lag,
    pearson,
    rmse,
    run_experiments,
)
from opinionda.errors import NumericalError, ValidationError
from opinionda.synthetic import SyntheticScenario, generate
from opinionda.timeseries import shift_days

from conftest import D0, poll, series


def wavy(n=120, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    return series(50 + 6 * np.sin(2 * np.pi * t / 37) + np.cumsum(rng.normal(0, 0.5, n)))


class TestPearson:
    def test_perfect_positive(self):
        i = np.arange(1, 11)
        assert pearson(np.column_stack([i, 2 * i + 3])) == pytest.approx(1.0)

    def test_perfect_negative(self):
        i = np.arange(1, 11)
        assert pearson(np.column_stack([i, -i])) == pytest.approx(-1.0)

    def test_zero_variance(self):
        with pytest.raises(NumericalError, match="zero variance"):
            pearson([[1, 2], [1, 3], [1, 4]])

    def test_matches_numpy(self, rng):
        p = rng.normal(size=(40, 2))
        assert pearson(p) == pytest.approx(np.corrcoef(p.T)[0, 1], abs=1e-12)

    @given(
        st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=3, max_size=30),
        st.floats(0.1, 10),
        st.floats(-50, 50),
    )
    def test_positive_affine_invariance(self, rows, a, b):
        p = np.array(rows)
        assume(np.ptp(p[:, 0]) > 1e-3 and np.ptp(p[:, 1]) > 1e-3)
        q = p.copy()
        q[:, 0] = a * q[:, 0] + b
        assert pearson(q) == pytest.approx(pearson(p), abs=1e-9)


class TestRmse:
    def test_identical(self):
        assert rmse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_arithmetic(self):
        assert rmse([0, 0], [3, 4]) == pytest.approx(np.sqrt(12.5))

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            rmse([1, 2], [1])

    pct6 = st.floats(-100, 100).map(lambda v: round(v, 6))

    @given(st.lists(st.tuples(pct6, pct6), min_size=1, max_size=20))
    def test_zero_iff_equal(self, rows):
        a, b = np.array(rows).T
        assert (rmse(a, b) == 0.0) == bool(np.array_equal(a, b))


class TestFitShift:
    def test_exact_self_match(self):
        s = wavy()
        f = fit_shift(s, shift_days(s, 7), criterion="rmse")
        assert (f.t_d, f.criterion_value, f.A, f.b, f.rescaled) == (7, 0.0, 1.0, 0.0, False)

    @pytest.mark.parametrize("k", [0, 1, 5, 16, 23])
    @pytest.mark.parametrize("criterion", list(Criterion))
    def test_noise_free_recovery(self, k, criterion):
        s = wavy(seed=k)
        assert fit_shift(s, shift_days(s, k), 23, criterion).t_d == k

    def test_sparse_target(self):
        s = wavy()
        target = shift_days(s, 12).values.copy()
        target[::3] = np.nan
        assert fit_shift(s, shift_days(s, 12).with_values(target)).t_d == 12

    def test_tie_smallest_shift(self):
        s = series([50.0] * 60)
        f = fit_shift(s, series([50.0] * 60), 10)
        assert f.t_d == 0

    def test_window_limits_pairs(self):
        s = wavy()
        target = shift_days(s, 5)
        f = fit_shift(s, target, 10, window=(D0 + timedelta(20), D0 + timedelta(39)))
        assert f.t_d == 5 and f.n_pairs == 20

    def test_no_overlap(self):
        with pytest.raises(ValidationError):
            fit_shift(series([1, 2, 3]), series([1, 2], start=D0 + timedelta(100)), 5)

    def test_recovers_lag_16_with_noise(self):
        # truth observed 16 days later with N(0, 2^2) noise
        hits = 0
        for seed in range(50):
            truth = generate(
                SyntheticScenario(truth_model="random_walk", seed=seed, noise_A=0, noise_B=0,
                                  lead_days=0, lag_days=0, tweets_per_day=None)
            ).truth
            noise = np.random.default_rng(seed + 1000).normal(0, 2, len(truth))
            target = shift_days(truth, 16)
            target = target.with_values(target.values + noise)
            hits += abs(fit_shift(truth, target, 23).t_d - 16) <= 1
        assert hits >= 45


class TestFitShiftRescale:
    def test_exact_affine(self):
        s = wavy()
        shifted = shift_days(s, 9)
        f = fit_shift_rescale(s, shifted.with_values(0.5 * shifted.values + 10))
        assert f.t_d == 9 and f.rescaled
        assert f.A == pytest.approx(0.5, abs=1e-9)
        assert f.b == pytest.approx(10.0, abs=1e-7)
        assert f.criterion_value == pytest.approx(0.0, abs=1e-9)

    def test_rank_deficient(self):
        with pytest.raises(NumericalError, match="rank deficient"):
            fit_shift_rescale(series([40.0] * 50), wavy(50), 5)

    def test_correlation_reports_ols(self):
        s = wavy()
        shifted = shift_days(s, 4)
        f = fit_shift_rescale(s, shifted.with_values(2.0 * shifted.values - 30), 10, "correlation")
        assert f.t_d == 4
        assert f.criterion_value == pytest.approx(1.0)
        assert (f.A, f.b) == (pytest.approx(2.0), pytest.approx(-30.0, abs=1e-6))

    def test_synthetic_affine_observer(self):
        # y = 0.6 * latent(t - 16) + 15 + N(0, 2^2)
        td_hits = ab_hits = 0
        for seed in range(50):
            truth = generate(
                SyntheticScenario(truth_model="random_walk", seed=seed, noise_A=0, noise_B=0,
                                  lead_days=0, lag_days=0, tweets_per_day=None)
            ).truth
            noise = np.random.default_rng(seed + 1000).normal(0, 2, len(truth))
            target = shift_days(truth, 16)
            target = target.with_values(0.6 * target.values + 15 + noise)
            f = fit_shift_rescale(truth, target, 23)
            td_hits += abs(f.t_d - 16) <= 1
            ab_hits += abs(f.t_d - 16) <= 1 and abs(f.A - 0.6) <= 0.1 and abs(f.b - 15) <= 5
        assert td_hits >= 45
        assert ab_hits >= 40

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 23))
    def test_rescale_never_worse(self, seed, k):
        s = wavy(seed=seed)
        rng = np.random.default_rng(seed)
        target = shift_days(s, k)
        target = target.with_values(0.7 * target.values + 12 + rng.normal(0, 1.5, len(s)))
        plain = fit_shift(s, target, 23, "rmse")
        resc = fit_shift_rescale(s, target, 23, "rmse")
        assert resc.criterion_value <= plain.criterion_value + 1e-12


def test_run_experiments_order():
    s = wavy()
    fits = run_experiments(s, shift_days(s, 3), 8)
    assert [(f.rescaled, f.criterion) for f in fits] == [
        (True, Criterion.RMSE),
        (True, Criterion.CORRELATION),
        (False, Criterion.RMSE),
        (False, Criterion.CORRELATION),
    ]
    assert consensus_lag(fits) == 3


def test_consensus_tie_goes_to_smaller():
    s = wavy()
    fits = run_experiments(s, shift_days(s, 3), 8)[:2] + run_experiments(s, shift_days(s, 2), 8)[:2]
    assert consensus_lag(fits) == 2


def midpoint_lag(span, compile_days):
    """Release date minus fieldwork midpoint when fieldwork ends compile_days before release."""
    start, release = 0.0, float(span)
    end = release - compile_days
    return release - (start + end) / 2


class TestDecomposeLag:
    def test_three_day_span_instance(self):
        polls = [poll(D0 + timedelta(10), 45, span=3, compile_days=1)]
        assert decompose_lag(16, polls, 1) == LagDecomposition(16, 14, 2)

    def test_mean_span_over_polls(self):
        polls = [poll(D0 + timedelta(10), 45, span=s, compile_days=1) for s in (2, 3, 4)]
        assert decompose_lag(16, polls, 1).obs_lag == 2

    @pytest.mark.parametrize("span, c", [(3, 1), (5, 1), (4, 0), (7, 2), (1, 1), (0, 0)])
    def test_against_midpoint_oracle(self, span, c):
        assert observation_lag(span, c) == int(np.floor(midpoint_lag(span, c) + 0.5))

    def test_span_five(self):
        polls = [poll(D0 + timedelta(10), 45, span=5, compile_days=1)]
        assert decompose_lag(16, polls, 1) == LagDecomposition(16, 13, 3)

    def test_instant_polls(self):
        # no fieldwork and no compilation: polls reflect the release day
        polls = [poll(D0 + timedelta(10), 45, span=0, compile_days=0)]
        assert decompose_lag(16, polls, 0) == LagDecomposition(16, 16, 0)

    def test_single_day_fieldwork_still_trails_by_compile_time(self):
        polls = [poll(D0 + timedelta(10), 45, span=1, compile_days=1)]
        assert decompose_lag(16, polls, 1).obs_lag == 1

    def test_inconsistent(self):
        polls = [poll(D0 + timedelta(10), 45, span=9, compile_days=1)]
        with pytest.raises(ValidationError, match="inconsistent decomposition"):
            decompose_lag(3, polls, 1)

    @given(st.integers(0, 40), st.integers(0, 6), st.integers(0, 3))
    def test_components_sum(self, total, span, c):
        assume(c <= span)
        polls = [poll(D0 + timedelta(10), 45, span=span, compile_days=c)]
        try:
            dec = decompose_lag(total, polls, c)
        except ValidationError:
            return
        assert dec.source_lead + dec.obs_lag == total
        assert min(dec.source_lead, dec.obs_lag) >= 0
