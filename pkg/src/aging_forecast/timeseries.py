"""Time-series container, CSV ingestion and chronological splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ColumnMissingError, CsvError, EmptyFileError, SplitError


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled observations of a single resource variable.

    ``values`` is stored as a read-only float64 array. ``start_index`` is the
    absolute sample index of ``values[0]`` in the series it was cut from.
    """

    values: np.ndarray
    sample_interval: float = 1.0
    start_index: int = 0
    variable_name: str = "value"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size < 1:
            raise ValueError("a TimeSeries needs at least one value")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at index {bad}")
        if not (self.sample_interval > 0 and math.isfinite(self.sample_interval)):
            raise ValueError("sample_interval must be a positive finite number")
        if self.start_index < 0:
            raise ValueError("start_index must be >= 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values, start_index: int | None = None) -> TimeSeries:
        """Copy of this series' metadata around new ``values``."""
        return TimeSeries(
            values,
            sample_interval=self.sample_interval,
            start_index=self.start_index if start_index is None else start_index,
            variable_name=self.variable_name,
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.6
    validation_fraction: float = 0.2

    def __post_init__(self):
        tf, vf = self.train_fraction, self.validation_fraction
        if not (0 < tf < 1 and 0 < vf < 1):
            raise ValueError("split fractions must lie in (0, 1)")
        if tf + vf >= 1:
            raise ValueError("train_fraction + validation_fraction must be < 1")

    @property
    def test_fraction(self) -> float:
        return 1.0 - self.train_fraction - self.validation_fraction


def split(series: TimeSeries, spec: SplitSpec = SplitSpec()
          ) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    """Cut ``series`` into contiguous train / validation / test segments.

    Boundaries are ``floor(N*train)`` and ``floor(N*(train+validation))``.
    """
    n = len(series)
    b1 = math.floor(n * spec.train_fraction)
    b2 = math.floor(n * (spec.train_fraction + spec.validation_fraction))
    sizes = {"train": b1, "validation": b2 - b1, "test": n - b2}
    empty = [name for name, size in sizes.items() if size < 1]
    if empty:
        raise SplitError(
            f"series of length {n} too short for split "
            f"({spec.train_fraction}, {spec.validation_fraction}): "
            f"{' and '.join(empty)} segment empty"
        )
    v = series.values
    s0 = series.start_index
    return (
        series.with_values(v[:b1], s0),
        series.with_values(v[b1:b2], s0 + b1),
        series.with_values(v[b2:], s0 + b2),
    )


def concat(*segments: TimeSeries) -> TimeSeries:
    """Join adjacent segments back into one series."""
    first = segments[0]
    return first.with_values(np.concatenate([s.values for s in segments]))


def _resolve_column(header: list[str] | None, column: str | int, path) -> int:
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
        return int(column)
    if header is None or column not in header:
        raise ColumnMissingError(f"{path}: no column named {column!r}")
    return header.index(column)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, column: str | int = 0, sample_interval: float = 1.0,
             variable_name: str | None = None) -> TimeSeries:
    """Read one column of a CSV file as a TimeSeries.

    ``column`` is a header name or a zero-based index. A header row is
    assumed when a name is given, or when the first row's selected cell is
    not numeric.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyFileError(f"{path}: file is empty")

    by_name = isinstance(column, str) and not column.isdigit()
    header = None
    if by_name:
        header = [c.strip() for c in rows[0]]
    else:
        idx0 = int(column)
        if idx0 < len(rows[0]) and not _is_number(rows[0][idx0].strip()):
            header = [c.strip() for c in rows[0]]
    idx = _resolve_column(header, column, path)
    data = rows[1:] if header is not None else rows
    if not data:
        raise EmptyFileError(f"{path}: no data rows")

    values = np.empty(len(data))
    for k, row in enumerate(data, start=1):
        if idx >= len(row):
            raise ColumnMissingError(f"{path}: row {k} has no column {idx}", row=k)
        cell = row[idx].strip()
        try:
            values[k - 1] = float(cell)
        except ValueError:
            raise CsvError(f"{path}: non-numeric value {cell!r} at row {k}", row=k) from None
        if not math.isfinite(values[k - 1]):
            raise CsvError(f"{path}: non-finite value {cell!r} at row {k}", row=k)

    if variable_name is None:
        variable_name = header[idx] if header is not None else "value"
    return TimeSeries(values, sample_interval=sample_interval, variable_name=variable_name)


def format_float(x: float) -> str:
    """17 significant digits: enough for an exact float64 round-trip."""
    return format(float(x), ".17g")


def write_csv(series: TimeSeries, path) -> Path:
    """Write a single-column CSV (header = variable name) that load_csv reads back."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(series.variable_name + "\n")
        fh.writelines(format_float(v) + "\n" for v in series.values)
    return path
