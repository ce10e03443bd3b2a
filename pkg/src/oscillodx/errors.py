"""Unified error model and error code constants for oscillodx."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional


class ErrorCode:
    """Error code constants for structured error reporting."""

    # Input errors
    INPUT_NOT_FOUND = "input_not_found"
    CSV_PARSE_ERROR = "csv_parse_error"
    TIMEBASE_JITTER = "timebase_jitter"

    # Output errors
    OUTPUT_NOT_WRITABLE = "output_not_writable"

    # Parameter errors
    INVALID_PARAMS = "invalid_params"

    # Precondition errors
    INSUFFICIENT_DATA = "insufficient_data"
    DEGENERATE_INPUT = "degenerate_input"
    WINDOW_OUT_OF_RANGE = "window_out_of_range"

    # Numerical errors
    STABILITY_ERROR = "stability_error"

    # Internal errors
    INTERNAL_ERROR = "internal_error"


class ExitCode:
    """Exit code constants for the CLI."""

    SUCCESS = 0
    GENERAL_FAILED = 1
    INCONCLUSIVE = 3  # success, verdict flagged inconclusive
    INPUT_INVALID = 10
    OUTPUT_NOT_WRITABLE = 11
    INVALID_PARAMS = 13
    PRECONDITION_FAILED = 20
    NUMERICAL_FAILURE = 21
    INTERNAL_ERROR = 99


ERROR_TO_EXIT_CODE: Dict[str, int] = {
    ErrorCode.INPUT_NOT_FOUND: ExitCode.INPUT_INVALID,
    ErrorCode.CSV_PARSE_ERROR: ExitCode.INPUT_INVALID,
    ErrorCode.TIMEBASE_JITTER: ExitCode.INPUT_INVALID,
    ErrorCode.OUTPUT_NOT_WRITABLE: ExitCode.OUTPUT_NOT_WRITABLE,
    ErrorCode.INVALID_PARAMS: ExitCode.INVALID_PARAMS,
    ErrorCode.INSUFFICIENT_DATA: ExitCode.PRECONDITION_FAILED,
    ErrorCode.DEGENERATE_INPUT: ExitCode.PRECONDITION_FAILED,
    ErrorCode.WINDOW_OUT_OF_RANGE: ExitCode.PRECONDITION_FAILED,
    ErrorCode.STABILITY_ERROR: ExitCode.NUMERICAL_FAILURE,
    ErrorCode.INTERNAL_ERROR: ExitCode.INTERNAL_ERROR,
}

KNOWN_ERROR_CODES = frozenset(ERROR_TO_EXIT_CODE)


@dataclass
class ErrorEntry:
    """Structured error entry recorded in run manifests."""

    code: str
    message: str
    hint: Optional[str] = None
    detail: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        result: Dict[str, Any] = {"code": self.code, "message": self.message}
        if self.hint is not None:
            result["hint"] = self.hint
        if self.detail is not None:
            result["detail"] = self.detail
        return result


class OscillodxError(Exception):
    """Base class for all domain errors raised by oscillodx."""

    code: str = ErrorCode.INTERNAL_ERROR

    def __init__(self, message: str, hint: Optional[str] = None, detail: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.hint = hint
        self.detail = detail

    @property
    def exit_code(self) -> int:
        return ERROR_TO_EXIT_CODE.get(self.code, ExitCode.GENERAL_FAILED)

    def to_entry(self) -> ErrorEntry:
        return ErrorEntry(code=self.code, message=self.message, hint=self.hint, detail=self.detail)


class InvalidParamsError(OscillodxError, ValueError):
    """Raised for non-finite or out-of-range parameters."""

    code = ErrorCode.INVALID_PARAMS


class StabilityError(OscillodxError):
    """Raised when the integration step makes the explicit scheme unstable."""

    code = ErrorCode.STABILITY_ERROR


class InsufficientDataError(OscillodxError):
    """Raised when a series is too short for the requested estimate."""

    code = ErrorCode.INSUFFICIENT_DATA


class DegenerateInputError(OscillodxError):
    """Raised when a series has zero variance."""

    code = ErrorCode.DEGENERATE_INPUT


class WindowError(OscillodxError):
    """Raised when an analysis window does not lie inside the series."""

    code = ErrorCode.WINDOW_OUT_OF_RANGE


class InputNotFoundError(OscillodxError):
    """Raised when an input file does not exist."""

    code = ErrorCode.INPUT_NOT_FOUND


class OutputNotWritableError(OscillodxError):
    """Raised when an output file cannot be written."""

    code = ErrorCode.OUTPUT_NOT_WRITABLE


class CsvFormatError(OscillodxError):
    """Raised when a CSV time-series file cannot be parsed."""

    code = ErrorCode.CSV_PARSE_ERROR

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None) -> None:
        detail = {"row": row, "column": column} if row is not None or column is not None else None
        super().__init__(message, hint="Check the file against the `time,<label>...` layout.", detail=detail)
        self.row = row
        self.column = column


class TimebaseJitterError(OscillodxError):
    """Raised when the time column is not uniformly sampled."""

    code = ErrorCode.TIMEBASE_JITTER

    def __init__(self, message: str, jitter: float) -> None:
        super().__init__(message, hint="Resample the data to a uniform time step first.", detail={"jitter": jitter if math.isfinite(jitter) else None})
        self.jitter = jitter


class ResolutionWarning(UserWarning):
    """Emitted when the integration step undersamples the oscillation period."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit-code contract."""

    if isinstance(exc, OscillodxError):
        return exc.exit_code
    return ExitCode.INTERNAL_ERROR
