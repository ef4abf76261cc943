"""Iterated multi-step forecasting and exhaustion-time estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, NonFiniteForecastError, SeriesTooShortError
from .mlp import MlpModel
from .preprocess import ScalerParams, scale_array, unscale_array
from .timeseries import TimeSeries, format_float

RISING = "rising_crossing"
FALLING = "falling_crossing"
DIRECTIONS = (RISING, FALLING)


class Predictor(Protocol):
    """Anything mapping a window of ``input_width`` values to the next value."""

    input_width: int

    def predict(self, window: np.ndarray) -> float: ...


def forecast_iterated(model: Predictor, seed_window, steps: int) -> np.ndarray:
    """Roll a one-step predictor forward ``steps`` times, feeding outputs back."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    window = np.ascontiguousarray(seed_window, dtype=np.float64)
    d = model.input_width
    if window.shape != (d,):
        raise DimensionMismatchError(f"seed window must have length {d}, got {window.shape}")

    if isinstance(model, MlpModel):
        out = kernels.backend.iterate_forecast(*model.kernel_args(), window, int(steps))
    else:
        buf = np.empty(d + steps)
        buf[:d] = window
        out = np.empty(steps)
        for k in range(steps):
            out[k] = buf[d + k] = model.predict(buf[k:k + d].copy())
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        raise NonFiniteForecastError(int(bad[0]))
    return out


def default_safety_margin(steps_to_crossing: int) -> int:
    return max(1, steps_to_crossing // 10)


def first_crossing(path, threshold: float, direction: str) -> int | None:
    """1-based index of the first value at/over (rising) or at/under (falling) threshold."""
    path = np.asarray(path)
    hit = path >= threshold if direction == RISING else path <= threshold
    idx = np.flatnonzero(hit)
    return int(idx[0]) + 1 if idx.size else None


@dataclass(frozen=True)
class ExhaustionEstimate:
    threshold: float
    direction: str
    steps_to_crossing: int | None
    crossing_time_seconds: float | None
    recommended_rejuvenation_step: int | None

    CSV_HEADER = "threshold,direction,steps_to_crossing,crossing_time_seconds,recommended_rejuvenation_step"

    @property
    def crosses(self) -> bool:
        return self.steps_to_crossing is not None

    def csv_row(self) -> str:
        def cell(x):
            if x is None:
                return ""
            return str(x) if isinstance(x, int) else format_float(x)
        return ",".join([format_float(self.threshold), self.direction,
                         cell(self.steps_to_crossing), cell(self.crossing_time_seconds),
                         cell(self.recommended_rejuvenation_step)])

    def describe(self) -> str:
        lines = [f"threshold: {self.threshold:g} ({self.direction})"]
        if not self.crosses:
            lines.append("no crossing within the forecast horizon")
        else:
            lines += [f"steps to crossing: {self.steps_to_crossing}",
                      f"time to crossing: {self.crossing_time_seconds:g} s",
                      f"rejuvenate at step: {self.recommended_rejuvenation_step}"]
        return "\n".join(lines)


def estimate_exhaustion(model: Predictor, recent: TimeSeries, scaler: ScalerParams,
                        threshold: float, direction: str = RISING, max_horizon: int = 1000,
                        safety_margin_steps: int | None = None) -> ExhaustionEstimate:
    """Forecast from the end of ``recent`` and find where it crosses ``threshold``.

    ``threshold`` is in raw units. Without an explicit ``safety_margin_steps``
    the margin is 10% of the crossing step (at least one step). The
    recommended step never drops below 1.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    d = model.input_width
    if len(recent) < d:
        raise SeriesTooShortError(f"need at least {d} recent values, got {len(recent)}")
    window = scale_array(recent.values[-d:], scaler)
    path = unscale_array(forecast_iterated(model, window, max_horizon), scaler)
    step = first_crossing(path, threshold, direction)
    if step is None:
        return ExhaustionEstimate(float(threshold), direction, None, None, None)
    margin = default_safety_margin(step) if safety_margin_steps is None else safety_margin_steps
    if margin < 0:
        raise ValueError("safety_margin_steps must be >= 0")
    return ExhaustionEstimate(float(threshold), direction, step,
                              step * recent.sample_interval, max(1, step - margin))
