"""Forecast accuracy measures: RMSE, MAPE, SMAPE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UndefinedDenominatorError
from .timeseries import format_float


def _pair(actual, forecast) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64).ravel()
    f = np.asarray(forecast, dtype=np.float64).ravel()
    if a.size != f.size:
        raise DimensionMismatchError(f"length mismatch: {a.size} actuals vs {f.size} forecasts")
    if a.size == 0:
        raise ValueError("empty input")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(f))):
        raise ValueError("inputs must be finite")
    return a, f


def rmse(actual, forecast) -> float:
    a, f = _pair(actual, forecast)
    return float(np.sqrt(np.mean((a - f) ** 2)))


def mape(actual, forecast) -> float:
    """Mean of ``100*|y - f| / |y|``, in percent. Zero actuals are an error."""
    a, f = _pair(actual, forecast)
    zeros = np.flatnonzero(a == 0)
    if zeros.size:
        raise UndefinedDenominatorError("mape", int(zeros[0]))
    return float(np.mean(100.0 * np.abs((a - f) / a)))


def smape(actual, forecast) -> float:
    """Mean of ``100*|X - F| / (0.5*(X + F))``, in percent.

    The denominator is the plain (signed) mean of actual and forecast; any
    non-positive denominator is rejected rather than absolute-valued.
    """
    a, f = _pair(actual, forecast)
    denom = 0.5 * (a + f)
    bad = np.flatnonzero(denom <= 0)
    if bad.size:
        raise UndefinedDenominatorError("smape", int(bad[0]))
    return float(np.mean(100.0 * np.abs(a - f) / denom))


@dataclass(frozen=True)
class ErrorReport:
    variable: str
    n_observations: int
    rmse: float
    mape_percent: float
    smape_percent: float

    CSV_HEADER = "variable,n,rmse,mape_percent,smape_percent"

    def csv_row(self) -> str:
        return ",".join([self.variable, str(self.n_observations),
                         *(_fmt(x) for x in (self.rmse, self.mape_percent, self.smape_percent))])


def _fmt(x: float) -> str:
    return "undefined" if np.isnan(x) else format_float(x)


def error_report(actual, forecast, variable: str = "value", strict: bool = True) -> ErrorReport:
    """All three measures at once.

    With ``strict=False`` an undefined MAPE/SMAPE is reported as NaN
    (rendered ``undefined`` in CSV) instead of raising.
    """
    a, f = _pair(actual, forecast)
    out = []
    for fn in (mape, smape):
        try:
            out.append(fn(a, f))
        except UndefinedDenominatorError:
            if strict:
                raise
            out.append(float("nan"))
    return ErrorReport(variable, a.size, rmse(a, f), *out)
