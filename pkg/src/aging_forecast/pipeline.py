"""End-to-end run: ingest, despike, split, scale, grid search, evaluate, estimate."""

from __future__ import annotations

import hashlib
import logging
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .config import PipelineConfig
from .forecast import ExhaustionEstimate, estimate_exhaustion
from .metrics import ErrorReport, error_report
from .mlp import MlpModel, dumps_model
from .preprocess import (ScalerParams, embed_continuation, fit_scaler, scale, sliding_median,
                         unscale_array)
from .timeseries import TimeSeries, concat, format_float, load_csv, split
from .tuner import GridSearchReport, emit_grid_table, grid_search

log = logging.getLogger(__name__)

OUTPUT_FILES = ("manifest.txt", "grid_table.csv", "errors.csv", "forecast_vs_actual.csv",
                "model.txt", "exhaustion.csv")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name: str):
    log.info("[%s] start", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class Prepared:
    series: TimeSeries           # after optional despiking, raw units
    train: TimeSeries            # scaled segments
    validation: TimeSeries
    test: TimeSeries
    scaler: ScalerParams


def prepare(cfg: PipelineConfig) -> Prepared:
    with stage("ingest"):
        series = load_csv(cfg.input, cfg.column, cfg.sample_interval, cfg.variable or None)
    if cfg.despike_window:
        with stage("despike"):
            series = sliding_median(series, cfg.despike_window, cfg.despike_align)
    with stage("split"):
        tr, va, te = split(series, cfg.split_spec())
    with stage("scale"):
        scaler = fit_scaler(concat(tr, va))
        tr, va, te = (scale(s, scaler) for s in (tr, va, te))
    return Prepared(series, tr, va, te, scaler)


def run_grid(cfg: PipelineConfig, prep: Prepared) -> GridSearchReport:
    selection = prep.validation if cfg.selection == "validation" else prep.test
    history = prep.train if cfg.selection == "validation" else concat(prep.train, prep.validation)
    with stage("grid"):
        return grid_search(history, selection, cfg.grid_spec(),
                           selection_segment=cfg.selection, workers=cfg.workers)


@dataclass
class Evaluation:
    target_index: np.ndarray
    actual: np.ndarray           # raw units
    forecast: np.ndarray
    persistence: np.ndarray
    reports: list[ErrorReport]


def evaluate(model: MlpModel, prep: Prepared, horizon: int, variable: str) -> Evaluation:
    """Test-segment accuracy in raw and scaled units, plus the persistence baseline."""
    history = concat(prep.train, prep.validation)
    ds = embed_continuation(history, prep.test, model.input_width, horizon)
    pred_scaled = model.predict_batch(ds.inputs)
    last_seen = ds.inputs[:, -1]
    sc = prep.scaler
    actual = unscale_array(ds.targets, sc)
    pred = unscale_array(pred_scaled, sc)
    pers = unscale_array(last_seen, sc)
    reports = [
        error_report(actual, pred, f"{variable}:raw", strict=False),
        error_report(ds.targets, pred_scaled, f"{variable}:scaled", strict=False),
        error_report(actual, pers, "persistence:raw", strict=False),
    ]
    return Evaluation(ds.target_index, actual, pred, pers, reports)


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_text(cfg: PipelineConfig, report: GridSearchReport | None = None) -> str:
    head = ["# aging-forecast run manifest",
            f"# input_sha256 = {file_sha256(cfg.input)}",
            f"# kernel_backend = {kernels.BACKEND_NAME}"]
    if report is not None:
        c = report.best_cell
        head.append(f"# selected = lags {c.lags}, hidden {c.hidden}, seed {c.seed_used}")
    return "\n".join(head) + "\n" + cfg.dumps()


def run(cfg: PipelineConfig) -> Path:
    """Execute the whole pipeline and write the six output files.

    Outputs are assembled in a scratch directory and only moved into
    ``cfg.output_dir`` once every stage has succeeded.
    """
    cfg = replace(cfg, input=str(Path(cfg.input).resolve()))
    out_dir = Path(cfg.output_dir)
    prep = prepare(cfg)
    report = run_grid(cfg, prep)
    model = report.best_cell.model
    variable = prep.series.variable_name

    with stage("evaluate"):
        ev = evaluate(model, prep, cfg.horizon, variable)
    exhaustion: ExhaustionEstimate | None = None
    if cfg.threshold is not None:
        with stage("exhaustion"):
            exhaustion = estimate_exhaustion(model, prep.series, prep.scaler, cfg.threshold,
                                             cfg.direction, cfg.max_horizon, cfg.safety_margin)

    with stage("write"):
        out_dir.parent.mkdir(parents=True, exist_ok=True)
        scratch = Path(tempfile.mkdtemp(prefix=".aging-", dir=out_dir.parent))
        try:
            (scratch / "manifest.txt").write_text(manifest_text(cfg, report))
            (scratch / "grid_table.csv").write_text(emit_grid_table(report))
            (scratch / "errors.csv").write_text(
                ErrorReport.CSV_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in ev.reports))
            rows = ["index,actual,forecast,persistence"]
            rows += [f"{i},{format_float(a)},{format_float(f)},{format_float(p)}"
                     for i, a, f, p in zip(ev.target_index, ev.actual, ev.forecast, ev.persistence)]
            (scratch / "forecast_vs_actual.csv").write_text("\n".join(rows) + "\n")
            (scratch / "model.txt").write_text(dumps_model(
                model, {"scaler_min": prep.scaler.min_value, "scaler_max": prep.scaler.max_value}))
            ex_row = exhaustion.csv_row() if exhaustion else ",,,,"
            (scratch / "exhaustion.csv").write_text(
                ExhaustionEstimate.CSV_HEADER + "\n" + ex_row + "\n")
            out_dir.mkdir(parents=True, exist_ok=True)
            for name in OUTPUT_FILES:
                shutil.move(str(scratch / name), out_dir / name)
        finally:
            shutil.rmtree(scratch, ignore_errors=True)
    return out_dir
