"""Bayesian fusion of social-media opinion and survey polls by Optimal Interpolation."""

from .alignment import (
    AlignmentFit,
    Criterion,
    LagDecomposition,
    decompose_lag,
    fit_shift,
    fit_shift_rescale,
    pearson,
    rmse,
    run_experiments,
)
from .assimilation import (
    AssimilationResult,
    OIParams,
    assimilate_series,
    kalman_gain,
    update_covariance,
    update_state,
)
from .errors import FilterDivergenceWarning, NumericalError, OpinionDAError, ValidationError
from .evaluation import EvalReport, full_report, mse, residual_diagnostics
from .hyperparams import (
    GAIN_PRESETS,
    ParamEstimate,
    estimate_Pb_snapshots,
    estimate_R_same_day,
    gain_bounds,
)
from .smoothing import LowessConfig, lowess
from .synthetic import SyntheticScenario, generate, true_errors
from .timeseries import (
    Camp,
    DailySeries,
    Mode,
    PollRecord,
    TweetCount,
    aggregate_tweets,
    complete_case_pairs,
    interpolate_linear,
    poll_series,
    shift_days,
)

__version__ = "0.1.0"
