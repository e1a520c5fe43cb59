from datetime import date

import numpy as np
import pytest

from opinionda.alignment import fit_shift, fit_shift_rescale
from opinionda.errors import ValidationError
from opinionda.smoothing import LowessConfig, lowess
from opinionda.synthetic import (
    DEFAULT_TRUTH_PARAMS,
    SyntheticScenario,
    TruthModel,
    generate,
    true_errors,
    with_seed,
)
from opinionda.timeseries import Camp, interpolate_linear

from conftest import series


def test_deterministic():
    sc = SyntheticScenario(seed=11)
    a, b = generate(sc), generate(sc)
    assert a.truth == b.truth and a.observer_a == b.observer_a and a.observer_b == b.observer_b
    assert a.polls == b.polls and a.tweets == b.tweets
    assert not np.array_equal(generate(with_seed(sc, 12)).truth.values, a.truth.values)


@pytest.mark.parametrize("model", list(TruthModel))
def test_noise_free_identity(model):
    sc = SyntheticScenario(
        truth_model=model, lead_days=0, lag_days=0, noise_A=0, noise_B=0,
        obs_B_density=1.0, tweets_per_day=None,
    )
    d = generate(sc)
    assert d.truth == d.observer_a == d.observer_b
    assert len(d.truth) == sc.n_days and d.truth.is_complete


def test_observer_definitions():
    sc = SyntheticScenario(affine_A=0.5, affine_b=20, noise_A=0, noise_B=0, tweets_per_day=None, obs_B_density=0.5)
    d = generate(sc)
    t = d.truth.values
    lead, lag = sc.lead_days, sc.lag_days
    assert np.allclose(d.observer_a.values[: -lead], 0.5 * t[lead:] + 20, atol=1e-6)
    b = d.observer_b.values
    days = np.flatnonzero(~np.isnan(b))
    days = days[days >= lag]
    assert np.allclose(b[days], t[days - lag], atol=1e-6)
    assert 0.35 < d.observer_b.n_present / sc.n_days < 0.65


def test_noise_free_lag_recovery():
    sc = SyntheticScenario(noise_A=0, noise_B=0, tweets_per_day=None)
    for seed in range(5):
        d = generate(with_seed(sc, seed))
        smoothed = lowess(d.observer_a, LowessConfig())
        fit = fit_shift_rescale(smoothed, d.observer_b)
        assert fit.t_d == sc.lead_days + sc.lag_days
        raw = fit_shift(d.observer_a, d.observer_b)
        assert raw.t_d == 16 and raw.criterion_value == pytest.approx(0.0, abs=1e-9)


def test_polls_and_tweets():
    sc = SyntheticScenario(polls_per_day=3, seed=2)
    d = generate(sc)
    assert len(d.polls) == 3 * d.observer_b.n_present
    for p in d.polls:
        assert p.leave_share + p.remain_share == pytest.approx(100.0)
        assert p.fieldwork_to_release_days == sc.poll_span_days
    days = {t.date for t in d.tweets}
    assert len(days) == sc.n_days
    leave = [t.count for t in d.tweets if t.camp is Camp.LEAVE]
    assert np.allclose(np.array(leave) / 100.0, d.observer_a.values)


def test_clamping_counted():
    sc = SyntheticScenario(truth_model="random_walk", truth_params={"sigma": 20.0}, seed=1)
    d = generate(sc)
    assert d.clamped > 0
    assert d.truth.values.min() >= 5.0 and d.truth.values.max() <= 95.0
    assert generate(SyntheticScenario(seed=1)).clamped == 0


def test_values_round_to_six_decimals():
    d = generate(SyntheticScenario(tweets_per_day=None))
    for v in np.concatenate([d.truth.values, d.observer_a.values]):
        assert float(f"{v:.6f}") == v


@pytest.mark.parametrize(
    "kw",
    [
        {"n_days": 46},
        {"noise_A": -1},
        {"obs_B_density": 0},
        {"obs_B_density": 1.5},
        {"lead_days": -1},
        {"truth_params": {"bogus": 1}},
        {"polls_per_day": 0},
    ],
)
def test_invalid(kw):
    with pytest.raises(ValidationError):
        SyntheticScenario(**kw)


def test_from_mapping():
    sc = SyntheticScenario.from_mapping(
        {"n_days": "90", "truth_model": "random_walk", "truth_sigma": "0.5",
         "noise_B": "1.5", "start": "2016-04-01", "tweets_per_day": "none"}
    )
    assert sc.n_days == 90 and sc.truth_model is TruthModel.RANDOM_WALK
    assert sc.truth_params == {**DEFAULT_TRUTH_PARAMS["random_walk"], "sigma": 0.5}
    assert sc.noise_B == 1.5 and sc.start == date(2016, 4, 1) and sc.tweets_per_day is None
    with pytest.raises(ValidationError):
        SyntheticScenario.from_mapping({"bogus": "1"})


class TestTrueErrors:
    truth = series([40.0, 42.0, 41.0, 45.0])

    def test_exact(self):
        assert true_errors(self.truth, self.truth) == (0.0, 0.0)

    def test_offset(self):
        mean, var = true_errors(series(self.truth.values + 3), self.truth)
        assert mean == pytest.approx(3.0) and var == pytest.approx(0.0, abs=1e-20)

    def test_mask(self):
        est = series([41.0, 42.0, 43.0, 45.0])
        mean, var = true_errors(est, self.truth, mask=[True, False, True, False])
        assert mean == pytest.approx(1.5) and var == pytest.approx(0.5)

    def test_misaligned(self):
        with pytest.raises(ValidationError):
            true_errors(series([1.0, 2.0, 3.0]), self.truth)
