"""Command-line interface: ``aging-forecast <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__, synthgen
from .config import KEYS, ConfigError, PipelineConfig, resolve
from .forecast import estimate_exhaustion, forecast_iterated
from .metrics import ErrorReport, error_report
from .mlp import MlpTopology, dumps_model, init_model, load_model, train
from .pipeline import StageError, evaluate, prepare, run, run_grid, stage
from .preprocess import ScalerParams, embed, embed_continuation, scale_array, unscale_array
from .timeseries import TimeSeries, format_float, load_csv, write_csv
from .tuner import emit_grid_table

_HELP = {
    "column": "CSV column, header name or zero-based index",
    "despike_window": "sliding-median window in samples (0 = off)",
    "lags": "comma-separated lag orders for the grid",
    "hidden": "comma-separated hidden-layer sizes for the grid",
    "selection": "segment that scores grid cells: validation or test",
    "direction": "rising or falling threshold crossing",
    "seed": "base seed (also settable through AGING_SEED)",
}


def _config_flags(parser: argparse.ArgumentParser, skip=("input",)) -> None:
    group = parser.add_argument_group("pipeline settings")
    for f in fields(PipelineConfig):
        if f.name in skip:
            continue
        group.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                           metavar=f.name.upper(), help=_HELP.get(f.name))


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None}


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


# -- subcommands -----------------------------------------------------------

def cmd_synth(args) -> int:
    params = {k: getattr(args, k) for k in ("base_level", "trend_per_step", "season_period",
                                            "season_step", "spike_rate", "spike_magnitude",
                                            "reset_floor", "noise_sigma", "sample_interval")}
    spec = synthgen.SynthSpec(args.shape, args.length, args.seed,
                              **{k: v for k, v in params.items() if v is not None})
    series = synthgen.generate(spec)
    out = Path(args.output or f"{args.shape}.csv")
    write_csv(series, out)
    v = series.values
    print(out)
    print(f"shape={spec.shape} n={v.size} interval={spec.sample_interval:g}s "
          f"min={v.min():.6g} max={v.max():.6g} mean={v.mean():.6g}")
    return 0


def cmd_run(args) -> int:
    cfg = resolve(args.config, _overrides(args))
    if not cfg.input:
        raise ConfigError("no input file (set 'input' in the config or pass --input)")
    out = run(cfg)
    print(out)
    print((out / "errors.csv").read_text(), end="")
    return 0


def cmd_grid(args) -> int:
    cfg = resolve(args.config, {**_overrides(args), "input": args.input})
    report = run_grid(cfg, prepare(cfg))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = emit_grid_table(report)
    (out / "grid_table.csv").write_text(table)
    (out / "grid_report.json").write_text(report.to_json())
    print(table, end="")
    print(f"best: lags={report.best[0]} hidden={report.best[1]} "
          f"rmse={report.best_cell.selection_rmse:.6g} ({report.selection_segment})")
    return 0


def cmd_train(args) -> int:
    cfg = resolve(args.config, {**_overrides(args), "input": args.input})
    if len(cfg.lags) != 1 or len(cfg.hidden) != 1:
        raise ConfigError("train needs a single --lags and a single --hidden value")
    prep = prepare(cfg)
    d, h = cfg.lags[0], cfg.hidden[0]
    with stage("train"):
        topo = MlpTopology(d, h, output_activation=cfg.output_activation)
        model, trace = train(init_model(topo, cfg.seed),
                             embed(prep.train, d, cfg.horizon),
                             embed_continuation(prep.train, prep.validation, d, cfg.horizon),
                             cfg.train_config())
    with stage("evaluate"):
        ev = evaluate(model, prep, cfg.horizon, prep.series.variable_name)
    out = Path(args.model_out)
    out.write_text(dumps_model(model, {"scaler_min": prep.scaler.min_value,
                                       "scaler_max": prep.scaler.max_value}))
    print(out)
    print(f"epochs={trace.epochs} best_epoch={trace.best_epoch} "
          f"validation_rmse={trace.validation_rmse[trace.best_epoch]:.6g}")
    print(ErrorReport.CSV_HEADER)
    for r in ev.reports:
        print(r.csv_row())
    return 0


def _load_model_and_scaler(path):
    model, extra = load_model(path)
    if "scaler_min" in extra and "scaler_max" in extra:
        scaler = ScalerParams(extra["scaler_min"], extra["scaler_max"])
    else:
        scaler = ScalerParams(0.0, 1.0)
    return model, scaler


def _recent(args) -> TimeSeries:
    return load_csv(args.input, args.column, args.sample_interval)


def cmd_forecast(args) -> int:
    with stage("forecast"):
        model, scaler = _load_model_and_scaler(args.model)
        series = _recent(args)
        if len(series) < model.input_width:
            raise ValueError(f"need at least {model.input_width} values")
        window = scale_array(series.values[-model.input_width:], scaler)
        path = unscale_array(forecast_iterated(model, window, args.steps), scaler)
    start = series.start_index + len(series)
    lines = ["index,forecast"] + [f"{start + k},{format_float(v)}" for k, v in enumerate(path)]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(args.output)
    else:
        sys.stdout.write(text)
    return 0


def cmd_exhaustion(args) -> int:
    with stage("exhaustion"):
        model, scaler = _load_model_and_scaler(args.model)
        direction = args.direction if args.direction.endswith("_crossing") \
            else f"{args.direction}_crossing"
        est = estimate_exhaustion(model, _recent(args), scaler, args.threshold, direction,
                                  args.max_horizon, args.safety_margin)
    print(est.describe())
    print(est.CSV_HEADER)
    print(est.csv_row())
    return 0


def cmd_metrics(args) -> int:
    with stage("metrics"):
        actual = load_csv(args.actual, args.actual_column).values
        fcol = args.forecast_column or ("0" if args.forecast else "1")
        forecast = load_csv(args.forecast or args.actual, fcol).values
        report = error_report(actual, forecast, args.variable)
    print(ErrorReport.CSV_HEADER)
    print(report.csv_row())
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aging-forecast",
                                description="Forecast resource exhaustion from aging metrics.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log stage progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic aging series to CSV")
    s.add_argument("--shape", choices=synthgen.SHAPES, default="swap_staircase")
    s.add_argument("--length", type=_positive_int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", "-o")
    for name in ("base_level", "trend_per_step", "season_step", "spike_rate",
                 "spike_magnitude", "reset_floor", "noise_sigma", "sample_interval"):
        s.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    s.add_argument("--season-period", dest="season_period", type=int)
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("run", help="full pipeline from a key=value config file")
    r.add_argument("config", nargs="?", help="config or manifest file")
    r.add_argument("--input", dest="input", default=None)
    _config_flags(r)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("grid", help="lag x hidden-size grid search")
    g.add_argument("input")
    g.add_argument("--config")
    _config_flags(g)
    g.set_defaults(func=cmd_grid)

    t = sub.add_parser("train", help="train one topology, write a model file")
    t.add_argument("input")
    t.add_argument("--config")
    t.add_argument("--model-out", default="model.txt")
    _config_flags(t)
    t.set_defaults(func=cmd_train)

    for name, func, helptext in (("forecast", cmd_forecast, "iterated forecast from a series end"),
                                 ("exhaustion", cmd_exhaustion, "time-to-threshold estimate")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("input")
        q.add_argument("--model", required=True)
        q.add_argument("--column", default="0")
        q.add_argument("--sample-interval", type=float, default=1.0)
        q.set_defaults(func=func)
        if name == "forecast":
            q.add_argument("--steps", type=_positive_int, default=100)
            q.add_argument("--output", "-o")
        else:
            q.add_argument("--threshold", type=float, required=True)
            q.add_argument("--direction", default="rising",
                           choices=("rising", "falling", "rising_crossing", "falling_crossing"))
            q.add_argument("--max-horizon", type=_positive_int, default=1000)
            q.add_argument("--safety-margin", type=int)

    m = sub.add_parser("metrics", help="RMSE / MAPE / SMAPE between two CSV columns")
    m.add_argument("actual")
    m.add_argument("forecast", nargs="?")
    m.add_argument("--actual-column", default="0")
    m.add_argument("--forecast-column", help="default: 0 in a separate file, else 1")
    m.add_argument("--variable", default="value")
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: [config] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
