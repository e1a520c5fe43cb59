"""Command-line pipeline: ingest -> align -> assimilate -> evaluate, plus synth.

Every subcommand works inside one run directory::

    RUN/dataset/            normalised inputs and validation report   (ingest)
    RUN/alignment/          lag experiments and lag decomposition     (align)
    RUN/<name>/             per-day assimilation output and params    (assimilate)
    RUN/<name>/evaluation/  evaluation reports and residual histograms (evaluate)

Exit codes: 0 success, 1 validation failure, 2 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, fields, replace
from datetime import date
from pathlib import Path
from typing import Sequence

from . import io
from .alignment import consensus_lag, decompose_lag, run_experiments
from .assimilation import OIParams, assimilate_series, renormalize_camps
from .errors import NumericalError, ValidationError
from .evaluation import EvalReport, full_report
from .hyperparams import (
    DEFAULT_R,
    GAIN_PRESETS,
    ParamEstimate,
    estimate_Pb_snapshots,
    estimate_R_same_day,
    preset_background,
)
from .smoothing import LowessConfig, lowess
from .synthetic import SyntheticScenario, generate
from .timeseries import (
    Camp,
    DailySeries,
    aggregate_tweets,
    interpolate_linear,
    poll_series,
    shift_days,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
MAX_REJECT_FRACTION = 0.10
CAMPS = (Camp.LEAVE, Camp.REMAIN)


@dataclass(frozen=True)
class PipelineConfig:
    """Pipeline settings read from a flat config file."""

    data_start: date | None = date(2016, 3, 1)
    window_start: date = date(2016, 3, 1)
    window_end: date = date(2016, 6, 1)
    lag_search_max: int = 23
    lowess_fraction: float = 0.15
    lowess_iterations: int = 0
    compile_days: float = 1.0
    total_lag: int | None = None
    gain_preset: str = "high"
    obs_variance: float | None = None
    H: float = 1.0
    renormalize_camps: bool = False
    output_dir: str = "out"

    def __post_init__(self):
        if not self.window_start < self.window_end:
            raise ValidationError("window_start must precede window_end")
        if self.lag_search_max < 0:
            raise ValidationError("lag_search_max must be non-negative")
        if not 0 < self.lowess_fraction <= 1:
            raise ValidationError("lowess_fraction must lie in (0, 1]")
        if self.compile_days < 0:
            raise ValidationError("compile_days must be non-negative")
        if self.gain_preset not in GAIN_PRESETS and self.gain_preset != "snapshot":
            try:
                if not float(self.gain_preset) > 0:
                    raise ValueError
            except ValueError:
                raise ValidationError(
                    f"gain_preset must be one of {sorted(GAIN_PRESETS)}, 'snapshot' "
                    "or a positive background variance"
                ) from None

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "PipelineConfig":
        kwargs = {}
        known = {f.name for f in fields(cls)}
        for key, value in raw.items():
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}")
            v = value.strip()
            try:
                if key in ("data_start", "window_start", "window_end"):
                    kwargs[key] = None if v.lower() in ("", "none") else date.fromisoformat(v)
                elif key in ("lag_search_max", "lowess_iterations"):
                    kwargs[key] = int(v)
                elif key == "total_lag":
                    kwargs[key] = None if v.lower() in ("", "none", "auto") else int(v)
                elif key in ("lowess_fraction", "compile_days", "H"):
                    kwargs[key] = float(v)
                elif key == "obs_variance":
                    kwargs[key] = None if v.lower() in ("", "none", "estimate") else float(v)
                elif key == "renormalize_camps":
                    kwargs[key] = v.lower() in ("1", "true", "yes", "on")
                else:
                    kwargs[key] = v
            except ValueError as exc:
                raise ValidationError(f"config key {key!r}: {exc}") from None
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path | None) -> "PipelineConfig":
        return cls() if path is None else cls.from_mapping(io.read_flat_config(path))


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _r6(x: float | None):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else round(x, 6)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------- ingest


def cmd_ingest(tweets_csv, polls_csv, run_dir, cfg: PipelineConfig) -> dict:
    """Validate both input files and write the normalised dataset."""
    out = Path(run_dir) / "dataset"
    out.mkdir(parents=True, exist_ok=True)
    for p in (tweets_csv, polls_csv):
        if not Path(p).is_file():
            raise ValidationError(f"{p}: no such file")
    tweets, t_rep = io.read_tweets(tweets_csv, cfg.data_start)
    polls, p_rep = io.read_polls(polls_csv, cfg.data_start)
    report = {"tweets": t_rep.as_dict(), "polls": p_rep.as_dict()}
    _dump_json(out / "validation.json", report)

    for name, rep in (("tweets", t_rep), ("polls", p_rep)):
        if rep.rows == 0:
            raise ValidationError(f"{name} file has no data rows")
        if rep.reject_fraction > MAX_REJECT_FRACTION:
            raise ValidationError(
                f"{name}: {len(rep.rejected)} of {rep.rows} rows rejected (more than 10%)"
            )
    if not tweets:
        raise ValidationError("no tweet records left after filtering")
    if not polls:
        raise ValidationError("no polls left after filtering")

    io.write_polls(out / "polls.csv", polls)
    for camp in CAMPS:
        io.write_series(out / f"tweets_{camp.value}.csv", aggregate_tweets(tweets, camp))
        io.write_series(out / f"polls_{camp.value}.csv", poll_series(polls, camp))
    return report


def _load_dataset(run_dir: Path):
    ds = run_dir / "dataset"
    if not ds.is_dir():
        raise ValidationError(f"{ds}: missing; run 'ingest' first")
    polls, _ = io.read_polls(ds / "polls.csv")
    tweets = {c: io.read_series(ds / f"tweets_{c.value}.csv") for c in CAMPS}
    poll_days = {c: io.read_series(ds / f"polls_{c.value}.csv") for c in CAMPS}
    return tweets, poll_days, polls


# --------------------------------------------------------------------------- align

ALIGN_COLUMNS = ["camp", "experiment", "criterion", "t_d", "A", "b", "rmse", "correlation", "n_pairs"]


def cmd_align(run_dir, cfg: PipelineConfig) -> dict:
    """Run the four lag-fitting experiments per camp and decompose the lag."""
    run_dir = Path(run_dir)
    tweets, poll_days, polls = _load_dataset(run_dir)
    out = run_dir / "alignment"
    out.mkdir(parents=True, exist_ok=True)
    lcfg = LowessConfig(cfg.lowess_fraction, cfg.lowess_iterations)

    rows, all_fits, fits_json = [], [], []
    for camp in CAMPS:
        source = lowess(interpolate_linear(tweets[camp]), lcfg)
        fits = run_experiments(
            source, poll_days[camp], cfg.lag_search_max, (cfg.window_start, cfg.window_end)
        )
        all_fits.extend(fits)
        for f in fits:
            experiment = "smooth_rescale" if f.rescaled else "smooth"
            rows.append(
                [camp.value, experiment, f.criterion.value, f.t_d, io.fmt(f.A), io.fmt(f.b),
                 io.fmt(f.rmse), io.fmt(f.correlation), f.n_pairs]
            )
            d = {k: _r6(v) if isinstance(v, float) else v for k, v in f.as_dict().items()}
            fits_json.append({"camp": camp.value, "experiment": experiment, **d})

    consensus = consensus_lag(all_fits)
    total = cfg.total_lag if cfg.total_lag is not None else consensus
    dec = decompose_lag(total, polls, cfg.compile_days)
    io.write_table(out / "alignment.csv", ALIGN_COLUMNS, rows)
    result = {"fits": fits_json, "consensus_lag": consensus, "decomposition": asdict(dec)}
    _dump_json(out / "alignment.json", result)
    return result


# --------------------------------------------------------------------------- assimilate

ASSIM_COLUMNS = ["date", "prior", "observation", "poll", "posterior", "observed", "K", "P_a"]


def _background(cfg: PipelineConfig, prior: DailySeries) -> ParamEstimate:
    if cfg.gain_preset in GAIN_PRESETS:
        return preset_background(cfg.gain_preset)
    if cfg.gain_preset == "snapshot":
        return estimate_Pb_snapshots(prior.values)
    return ParamEstimate.manual(float(cfg.gain_preset))


def _obs_variance(cfg: PipelineConfig, polls, camp) -> ParamEstimate:
    if cfg.obs_variance is not None:
        return ParamEstimate.manual(cfg.obs_variance)
    try:
        return estimate_R_same_day(polls, camp)
    except ValidationError as exc:
        _log(f"warning: {camp.value}: {exc}; using R = {DEFAULT_R}")
        return ParamEstimate.manual(DEFAULT_R)


def cmd_assimilate(run_dir, cfg: PipelineConfig, name: str = "assimilation") -> dict:
    """Shift, interpolate and fuse each camp; write per-day tables and params."""
    run_dir = Path(run_dir)
    tweets, poll_days, polls = _load_dataset(run_dir)
    align_json = run_dir / "alignment" / "alignment.json"
    if cfg.total_lag is not None:
        dec = asdict(decompose_lag(cfg.total_lag, polls, cfg.compile_days))
    elif align_json.is_file():
        dec = json.loads(align_json.read_text())["decomposition"]
    else:
        raise ValidationError(f"{align_json}: missing; run 'align' or set total_lag")
    lead, lag = int(dec["source_lead"]), int(dec["obs_lag"])

    out = run_dir / name
    out.mkdir(parents=True, exist_ok=True)
    params_out, tables = {}, {}
    for camp in CAMPS:
        prior = shift_days(interpolate_linear(tweets[camp]), lead)
        poll = shift_days(poll_days[camp], -lag)
        obs = interpolate_linear(poll) if poll.n_present >= 2 else poll
        R = _obs_variance(cfg, polls, camp)
        Pb = _background(cfg, prior)
        params = OIParams(H=cfg.H, R=R.value, P_b=Pb.value, x0=float(prior.values[0]))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = assimilate_series(prior, obs, params)
        for w in caught:
            _log(f"warning: {camp.value}: {w.message}")
        tables[camp] = (prior, obs, poll, res)
        params_out[camp.value] = {
            "H": cfg.H,
            "R": _r6(R.value),
            "R_method": R.method.value,
            "R_sample_size": R.sample_size,
            "P_b": _r6(Pb.value),
            "P_b_method": Pb.method.value,
            "K": _r6(res.gain),
            "P_a": _r6(res.posterior_variance),
            "x0": _r6(params.x0),
            "source_lead": lead,
            "obs_lag": lag,
            "n_observed": res.n_observed,
            "biased_innovations": res.biased_innovations,
        }

    renorm = {}
    if cfg.renormalize_camps:
        leave, remain = renormalize_camps(
            tables[Camp.LEAVE][3].posterior, tables[Camp.REMAIN][3].posterior
        )
        renorm = {Camp.LEAVE: leave, Camp.REMAIN: remain}

    for camp, (prior, obs, poll, res) in tables.items():
        post = res.posterior
        header = ASSIM_COLUMNS + (["posterior_renormalized"] if renorm else [])
        rows = []
        for i, d in enumerate(post.dates):
            row = [
                d.isoformat(),
                io.fmt(prior.get(d)),
                io.fmt(obs.get(d)),
                io.fmt(poll.get(d)),
                io.fmt(post.values[i]),
                int(res.observed_mask[i]),
                io.fmt(res.gain),
                io.fmt(res.posterior_variance),
            ]
            if renorm:
                row.append(io.fmt(renorm[camp].values[i]))
            rows.append(row)
        io.write_table(out / f"assimilation_{camp.value}.csv", header, rows)
    _dump_json(out / "params.json", params_out)
    return params_out


# --------------------------------------------------------------------------- evaluate


def cmd_evaluate(run_dir, name: str = "assimilation") -> dict:
    """Score each camp's assimilation run and write the reports."""
    src = Path(run_dir) / name
    out = src / "evaluation"
    reports = {}
    for camp in CAMPS:
        path = src / f"assimilation_{camp.value}.csv"
        if not path.is_file():
            raise ValidationError(f"{path}: missing; run 'assimilate' first")
        posterior = io.read_series(path, "posterior")
        prior = io.read_series(path, "prior")
        obs = io.read_series(path, "observation")
        K = io.read_series(path, "K").values
        reports[camp] = full_report(posterior, obs, prior, float(K[0]))
    out.mkdir(parents=True, exist_ok=True)
    for camp, rep in reports.items():
        (out / f"evaluation_{camp.value}.json").write_text(rep.to_json() + "\n")
        res = rep.residuals
        io.write_table(
            out / f"residual_histogram_{camp.value}.csv",
            ["bin_left", "bin_right", "count"],
            [
                [io.fmt(res.hist_edges[i]), io.fmt(res.hist_edges[i + 1]), res.hist_counts[i]]
                for i in range(len(res.hist_counts))
            ],
        )
    io.write_table(
        out / "evaluation.csv",
        ["camp"] + EvalReport.csv_header(),
        [[camp.value] + rep.csv_row() for camp, rep in reports.items()],
    )
    return {camp.value: rep.as_dict() for camp, rep in reports.items()}


# --------------------------------------------------------------------------- synth


def cmd_synth(out_dir, scenario: SyntheticScenario) -> SyntheticScenario:
    """Write a synthetic dataset in the ingestion CSV schema plus its ground truth."""
    if scenario.tweets_per_day is None:
        raise ValidationError("synth output needs tweets_per_day to emit tweet counts")
    data = generate(scenario)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_tweets(out / "tweets.csv", data.tweets)
    io.write_polls(out / "polls.csv", data.polls)
    io.write_series(out / "truth.csv", data.truth)
    io.write_series(out / "observer_a.csv", data.observer_a)
    io.write_series(out / "observer_b.csv", data.observer_b)
    meta = {
        k: (v.isoformat() if isinstance(v, date) else getattr(v, "value", v))
        for k, v in asdict(scenario).items()
    }
    meta["truth_params"] = dict(scenario.truth_params)
    meta["clamped"] = data.clamped
    _dump_json(out / "scenario.json", meta)
    return scenario


# --------------------------------------------------------------------------- entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionda",
        description="Align and fuse social-media opinion with polls by Optimal Interpolation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="run directory"):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", required=True, help=out_help)

    p = sub.add_parser("ingest", help="validate input CSVs and write the dataset")
    common(p)
    p.add_argument("--tweets", required=True)
    p.add_argument("--polls", required=True)

    p = sub.add_parser("align", help="estimate the lag between tweets and polls")
    common(p)

    for cmd, helptext in (
        ("assimilate", "fuse tweets and polls"),
        ("run", "ingest, align, assimilate and evaluate in one go"),
    ):
        p = sub.add_parser(cmd, help=helptext)
        common(p)
        p.add_argument("--preset", choices=sorted(GAIN_PRESETS) + ["snapshot"])
        p.add_argument("--renormalize", action="store_true", help="rescale camps to sum to 100")
        p.add_argument("--name", default="assimilation", help="output subdirectory")
        if cmd == "run":
            p.add_argument("--tweets", required=True)
            p.add_argument("--polls", required=True)

    p = sub.add_parser("evaluate", help="score an assimilation run")
    common(p)
    p.add_argument("--name", default="assimilation")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p, "output directory")
    p.add_argument("--seed", type=int)
    return parser


def _apply_overrides(cfg: PipelineConfig, args) -> PipelineConfig:
    if getattr(args, "preset", None):
        cfg = replace(cfg, gain_preset=args.preset)
    if getattr(args, "renormalize", False):
        cfg = replace(cfg, renormalize_camps=True)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            raw = io.read_flat_config(args.config) if args.config else {}
            if args.seed is not None:
                raw["seed"] = str(args.seed)
            cmd_synth(args.out, SyntheticScenario.from_mapping(raw))
            return EXIT_OK

        cfg = _apply_overrides(PipelineConfig.load(args.config), args)
        if args.command in ("ingest", "run"):
            report = cmd_ingest(args.tweets, args.polls, args.out, cfg)
            _log(
                f"ingest: {report['tweets']['accepted']} tweet rows, "
                f"{report['polls']['accepted']} polls accepted"
            )
        if args.command in ("align", "run"):
            res = cmd_align(args.out, cfg)
            _log(f"align: consensus lag {res['consensus_lag']} days, {res['decomposition']}")
        if args.command in ("assimilate", "run"):
            params = cmd_assimilate(args.out, cfg, args.name)
            _log("assimilate: " + ", ".join(f"{c} K={p['K']}" for c, p in params.items()))
        if args.command in ("evaluate", "run"):
            cmd_evaluate(args.out, args.name)
    except NumericalError as exc:
        _log(f"error: {exc}")
        return EXIT_NUMERICAL
    except (ValidationError, OSError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_VALIDATION
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
