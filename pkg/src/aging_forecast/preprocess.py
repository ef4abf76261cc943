"""Despiking, min-max scaling and lag embedding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConstantSegmentError, SeriesTooShortError
from .timeseries import TimeSeries

ALIGNMENTS = ("leading", "trailing", "centered")


def hours_to_samples(hours: float, sample_interval: float) -> int:
    """Number of samples spanning ``hours`` at the given sampling interval."""
    n = int(round(hours * 3600.0 / sample_interval))
    if n < 1:
        raise ValueError("window shorter than one sample")
    return n


def sliding_median(series: TimeSeries, window_samples: int,
                   align: str = "leading") -> TimeSeries:
    """Median over a sliding window of ``window_samples`` values.

    Output has ``N - window + 1`` values. With the default leading alignment
    output ``t`` is the median of ``values[t : t + window]`` (the samples that
    follow ``t``), so ``start_index`` is unchanged. ``trailing`` and
    ``centered`` compute the same numbers but attribute each one to the last
    or middle sample of its window, shifting ``start_index`` accordingly.
    Even windows average the two middle order statistics.
    """
    if align not in ALIGNMENTS:
        raise ValueError(f"align must be one of {ALIGNMENTS}")
    if window_samples < 1:
        raise ValueError("window_samples must be >= 1")
    if window_samples > len(series):
        raise SeriesTooShortError(
            f"median window {window_samples} larger than series ({len(series)})")
    out = kernels.backend.rolling_median(series.values, int(window_samples))
    shift = {"leading": 0, "trailing": window_samples - 1,
             "centered": (window_samples - 1) // 2}[align]
    return series.with_values(out, series.start_index + shift)


@dataclass(frozen=True)
class ScalerParams:
    min_value: float
    max_value: float

    def __post_init__(self):
        if not (np.isfinite(self.min_value) and np.isfinite(self.max_value)):
            raise ValueError("scaler bounds must be finite")
        if not self.max_value > self.min_value:
            raise ConstantSegmentError("scaler needs max_value > min_value")

    @property
    def span(self) -> float:
        return self.max_value - self.min_value


def fit_scaler(segment: TimeSeries) -> ScalerParams:
    if len(segment) < 2:
        raise SeriesTooShortError("fit_scaler needs at least two values")
    lo, hi = float(segment.values.min()), float(segment.values.max())
    if hi == lo:
        raise ConstantSegmentError(f"constant segment (all values {lo}); scaling undefined")
    return ScalerParams(lo, hi)


def scale_array(x, params: ScalerParams) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - params.min_value) / params.span


def unscale_array(y, params: ScalerParams) -> np.ndarray:
    return np.asarray(y, dtype=np.float64) * params.span + params.min_value


def scale(series: TimeSeries, params: ScalerParams) -> TimeSeries:
    """Map onto [0, 1] relative to the fitted range; values outside it are kept."""
    return series.with_values(scale_array(series.values, params))


def unscale(series: TimeSeries, params: ScalerParams) -> TimeSeries:
    return series.with_values(unscale_array(series.values, params))


@dataclass(frozen=True)
class LagDataset:
    """Supervised pairs: ``inputs[i]`` (oldest first) -> ``targets[i]``.

    ``target_index`` holds the absolute sample index of each target.
    """

    inputs: np.ndarray
    targets: np.ndarray
    order_d: int
    horizon_n: int
    target_index: np.ndarray

    def __len__(self) -> int:
        return self.targets.size


def _embed_values(values: np.ndarray, d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    count = values.size - d - n + 1
    inputs = np.lib.stride_tricks.sliding_window_view(values, d)[:count]
    return np.ascontiguousarray(inputs), values[d - 1 + n:].copy()


def embed(series: TimeSeries, order_d: int, horizon_n: int = 1) -> LagDataset:
    """Pairs ``values[i:i+d] -> values[i+d-1+n]`` for every admissible ``i``."""
    if order_d < 1 or horizon_n < 1:
        raise ValueError("order_d and horizon_n must be >= 1")
    n = len(series)
    if n < order_d + horizon_n:
        raise SeriesTooShortError(
            f"series of length {n} too short for order {order_d}, horizon {horizon_n}")
    inputs, targets = _embed_values(series.values, order_d, horizon_n)
    first = series.start_index + order_d - 1 + horizon_n
    return LagDataset(inputs, targets, order_d, horizon_n,
                      np.arange(first, first + targets.size))


def embed_continuation(history: TimeSeries, segment: TimeSeries, order_d: int,
                       horizon_n: int = 1) -> LagDataset:
    """Embed ``segment`` using the tail of ``history`` as leading context.

    Every value of ``segment`` becomes a target, provided ``history`` holds at
    least ``order_d + horizon_n - 1`` values; otherwise as many as possible.
    """
    need = order_d + horizon_n - 1
    tail = history.values[max(0, len(history) - need):]
    joined = TimeSeries(np.concatenate([tail, segment.values]),
                        sample_interval=segment.sample_interval,
                        start_index=max(0, segment.start_index - tail.size),
                        variable_name=segment.variable_name)
    return embed(joined, order_d, horizon_n)
