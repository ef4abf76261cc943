"""Exhaustive (time lags x hidden neurons) grid search, minimum-RMSE selection."""

from __future__ import annotations

import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import AgingForecastError
from .mlp import MlpModel, MlpTopology, TrainConfig, init_model, train
from .preprocess import LagDataset, embed, embed_continuation
from .timeseries import TimeSeries

SELECTION_SEGMENTS = ("validation", "test")


@dataclass(frozen=True)
class GridSpec:
    lag_values: tuple[int, ...] = (3, 4, 5, 6, 7)
    hidden_values: tuple[int, ...] = (2, 3, 4, 5, 6, 7)
    horizon_n: int = 1
    seeds_per_cell: int = 3
    base_seed: int = 0
    output_activation: str = "identity"
    train_config: TrainConfig = TrainConfig()

    def __post_init__(self):
        lags = tuple(sorted(set(int(x) for x in self.lag_values)))
        hidden = tuple(sorted(set(int(x) for x in self.hidden_values)))
        if not lags or not hidden:
            raise ValueError("lag_values and hidden_values must be non-empty")
        if lags[0] < 1 or hidden[0] < 1 or self.horizon_n < 1 or self.seeds_per_cell < 1:
            raise ValueError("grid values, horizon and seeds_per_cell must be positive")
        object.__setattr__(self, "lag_values", lags)
        object.__setattr__(self, "hidden_values", hidden)

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [(d, h) for d in self.lag_values for h in self.hidden_values]


def cell_seed(base_seed: int, lags: int, hidden: int, replicate: int) -> int:
    """64-bit seed derived from the cell coordinates only (order-independent)."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(lags, hidden, replicate))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class CellResult:
    lags: int
    hidden: int
    selection_rmse: float | None = None
    seed_used: int | None = None
    error: str | None = None
    model: MlpModel | None = field(default=None, repr=False, compare=False)

    @property
    def failed(self) -> bool:
        return self.selection_rmse is None


@dataclass
class GridSearchReport:
    cells: dict[tuple[int, int], CellResult]
    best: tuple[int, int]
    selection_segment: str
    lag_values: tuple[int, ...]
    hidden_values: tuple[int, ...]

    @property
    def best_cell(self) -> CellResult:
        return self.cells[self.best]

    def to_dict(self) -> dict:
        return {
            "selection_segment": self.selection_segment,
            "lag_values": list(self.lag_values),
            "hidden_values": list(self.hidden_values),
            "best": {"lags": self.best[0], "hidden": self.best[1],
                     "selection_rmse": self.best_cell.selection_rmse,
                     "seed": self.best_cell.seed_used},
            "cells": [{"lags": c.lags, "hidden": c.hidden, "selection_rmse": c.selection_rmse,
                       "seed": c.seed_used, "error": c.error}
                      for c in (self.cells[k] for k in sorted(self.cells))],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# (train_set, selection_set, topology, seed, config) -> (model, selection RMSE)
CellTrainer = Callable[[LagDataset, LagDataset, MlpTopology, int, TrainConfig],
                       tuple[MlpModel, float]]


def mlp_cell_trainer(train_set, selection_set, topology, seed, config):
    model, trace = train(init_model(topology, seed), train_set, selection_set,
                         replace(config, seed=seed))
    return model, trace.validation_rmse[trace.best_epoch]


def _run_cell(train_series, selection_series, spec, d, h, trainer) -> CellResult:
    res = CellResult(d, h)
    try:
        train_set = embed(train_series, d, spec.horizon_n)
        selection_set = embed_continuation(train_series, selection_series, d, spec.horizon_n)
        topo = MlpTopology(d, h, output_activation=spec.output_activation)
        for r in range(spec.seeds_per_cell):
            seed = cell_seed(spec.base_seed, d, h, r)
            model, score = trainer(train_set, selection_set, topo, seed, spec.train_config)
            if res.selection_rmse is None or score < res.selection_rmse:
                res.selection_rmse, res.seed_used, res.model = float(score), seed, model
    except (AgingForecastError, ValueError) as exc:
        return CellResult(d, h, error=f"{type(exc).__name__}: {exc}")
    return res


def select_best(cells: dict[tuple[int, int], CellResult]) -> tuple[int, int]:
    """Minimum selection RMSE; ties go to fewer lags, then fewer hidden units."""
    ok = [c for c in cells.values() if not c.failed]
    if not ok:
        raise AgingForecastError("every grid cell failed")
    best = min(ok, key=lambda c: (c.selection_rmse, c.lags, c.hidden))
    return best.lags, best.hidden


def grid_search(train_series: TimeSeries, selection_series: TimeSeries,
                spec: GridSpec = GridSpec(), *, selection_segment: str = "validation",
                workers: int = 1, trainer: CellTrainer = mlp_cell_trainer) -> GridSearchReport:
    """Train every (lags, hidden) cell and pick the lowest selection RMSE.

    ``selection_series`` is the segment that scores cells (and drives the
    best-epoch snapshot); it directly follows ``train_series`` in time. Pass
    the test segment with ``selection_segment="test"`` to reproduce the
    select-on-test protocol. Each cell keeps its best of ``seeds_per_cell``
    initialisations. Cells run on a thread pool when ``workers > 1``; results
    do not depend on scheduling.
    """
    if selection_segment not in SELECTION_SEGMENTS:
        raise ValueError(f"selection_segment must be one of {SELECTION_SEGMENTS}")

    def job(cell):
        return _run_cell(train_series, selection_series, spec, *cell, trainer)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, spec.cells))
    else:
        results = [job(c) for c in spec.cells]
    cells = {(r.lags, r.hidden): r for r in results}
    return GridSearchReport(cells, select_best(cells), selection_segment,
                            spec.lag_values, spec.hidden_values)


def emit_grid_table(report: GridSearchReport) -> str:
    """CSV matrix: rows are lag values, columns hidden sizes; best cell gets ``*``."""
    out = io.StringIO()
    out.write("lags\\hidden," + ",".join(str(h) for h in report.hidden_values) + "\n")
    for d in report.lag_values:
        row = [str(d)]
        for h in report.hidden_values:
            c = report.cells[(d, h)]
            text = "FAIL" if c.failed else format(c.selection_rmse, ".10g")
            row.append(text + ("*" if (d, h) == report.best else ""))
        out.write(",".join(row) + "\n")
    return out.getvalue()
