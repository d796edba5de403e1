"""
Error hierarchy for driftgate.
Every error carries the process exit code the CLI maps it to.
"""
from typing import Optional


class DriftGateError(Exception):
    """Base class for all driftgate errors."""

    exit_code = 2


class SchemaError(DriftGateError):
    """A column is missing, duplicated, or of the wrong kind."""


class ParseError(DriftGateError):
    """A cell could not be parsed according to its declared kind."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column


class EmptyInputError(DriftGateError):
    """The input contains no data rows."""


class ContractError(DriftGateError):
    """A caller-side precondition was violated."""


class DegenerateLabelError(DriftGateError):
    """Labels contain a single class where two are required."""


class FoldError(DriftGateError):
    """A cross-validation fold cannot be trained or scored."""

    def __init__(self, message: str, fold: int):
        super().__init__(f"fold {fold}: {message}")
        self.fold = fold


class EmptySelectionError(DriftGateError):
    """A row selection (by month or quantile) came out empty."""


class SpecError(DriftGateError):
    """A synthetic shift specification cannot be realized."""


class GridCellError(DriftGateError):
    """A grid cell failed; wraps the underlying error with its (set, param) key."""

    def __init__(self, set_id: int, param_tag: str, cause: Exception):
        super().__init__(f"set {set_id}, param {param_tag}: {cause}")
        self.set_id = set_id
        self.param_tag = param_tag
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)


class OutputError(DriftGateError):
    """An output file could not be written."""

    exit_code = 3


__all__ = [
    "DriftGateError",
    "SchemaError",
    "ParseError",
    "EmptyInputError",
    "ContractError",
    "DegenerateLabelError",
    "FoldError",
    "EmptySelectionError",
    "SpecError",
    "GridCellError",
    "OutputError",
]
