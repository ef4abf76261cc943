"""Exception types raised by the library."""

from __future__ import annotations


class AgingForecastError(Exception):
    """Base class for all library errors."""


class CsvError(AgingForecastError, ValueError):
    """Malformed or unusable CSV input.

    ``row`` is the 1-based data row (header excluded) when the problem is tied
    to a specific cell.
    """

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class ColumnMissingError(CsvError):
    pass


class EmptyFileError(CsvError):
    pass


class SplitError(AgingForecastError, ValueError):
    pass


class SeriesTooShortError(AgingForecastError, ValueError):
    pass


class ConstantSegmentError(AgingForecastError, ValueError):
    pass


class DimensionMismatchError(AgingForecastError, ValueError):
    pass


class TrainingDivergedError(AgingForecastError, ArithmeticError):
    def __init__(self, epoch: int, example: int):
        super().__init__(f"non-finite loss at epoch {epoch}, example {example}")
        self.epoch = epoch
        self.example = example


class UndefinedDenominatorError(AgingForecastError, ZeroDivisionError):
    def __init__(self, metric: str, index: int):
        super().__init__(f"{metric}: undefined denominator at index {index}")
        self.metric = metric
        self.index = index


class NonFiniteForecastError(AgingForecastError, ArithmeticError):
    def __init__(self, step: int):
        super().__init__(f"non-finite forecast at step {step}")
        self.step = step
