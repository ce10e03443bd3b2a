"""CSV time-series files and plot-ready CSV tables.

Time-series files have a header ``time,<label1>,<label2>,...``, a uniformly
sampled time column in seconds and one numeric column per channel. Lines
starting with ``#`` are comments. Values are written with 17 significant
digits so a write/read cycle reproduces every sample exactly.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Mapping, Optional

import numpy as np
import pandas as pd

from .bootstrap import KurtosisInterval
from .constants import TIMEBASE_JITTER_TOL
from .errors import CsvFormatError, InputNotFoundError, OutputNotWritableError, TimebaseJitterError
from .localize import SourceRanking
from .logging_utils import get_logger
from .montecarlo import MonteCarloResult
from .series import MultiChannelRecord, TimeSeries, Window
from .spectrum import SpectrumEstimate
from .stats import KurtosisTrace

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"
TIME_COLUMN = "time"


def _bad_cell(frame: pd.DataFrame, column: str) -> int:
    parsed = pd.to_numeric(frame[column], errors="coerce")
    bad = np.nonzero(parsed.isna().to_numpy())[0]
    return int(bad[0]) + 1 if bad.size else 0


def read_csv(path: Path, window: Optional[Window] = None) -> MultiChannelRecord:
    """Parse a ``time,<labels...>`` file into a record.

    Raises
    ------
    InputNotFoundError
        The file does not exist.
    CsvFormatError
        Missing time column, no channels, empty or non-numeric cells.
        ``row`` counts data rows from 1.
    TimebaseJitterError
        Time steps deviate from the mean step by more than 1 ppm.
    """
    path = Path(path)
    if not path.is_file():
        raise InputNotFoundError(f"Input file not found: {path}", hint="Check the --in path.")
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise CsvFormatError(f"Cannot parse {path}: {exc}") from exc

    columns = [str(c).strip() for c in frame.columns]
    frame.columns = columns
    if not columns or columns[0].lower() != TIME_COLUMN:
        raise CsvFormatError(f"First column of {path} must be '{TIME_COLUMN}'", column=columns[0] if columns else None)
    labels = columns[1:]
    if not labels:
        raise CsvFormatError(f"{path} has no channel columns")
    if len(frame) < 2:
        raise CsvFormatError(f"{path} needs at least two data rows", row=len(frame))

    for column in columns:
        values = frame[column]
        if values.isna().any():
            row = int(np.nonzero(values.isna().to_numpy())[0][0]) + 1
            raise CsvFormatError(f"Missing value in column {column!r}, row {row}", row=row, column=column)
        if not pd.api.types.is_numeric_dtype(values):
            row = _bad_cell(frame, column)
            raise CsvFormatError(f"Non-numeric value in column {column!r}, row {row}", row=row, column=column)
        if not np.all(np.isfinite(values.to_numpy(dtype=float))):
            row = int(np.nonzero(~np.isfinite(values.to_numpy(dtype=float)))[0][0]) + 1
            raise CsvFormatError(f"Non-finite value in column {column!r}, row {row}", row=row, column=column)

    times = frame[columns[0]].to_numpy(dtype=float)
    steps = np.diff(times)
    dt = (times[-1] - times[0]) / (times.size - 1)
    if dt <= 0 or np.any(steps <= 0):
        raise TimebaseJitterError(f"Time column of {path} is not strictly increasing", jitter=float("inf"))
    jitter = float(np.max(np.abs(steps - dt)) / dt)
    if jitter > TIMEBASE_JITTER_TOL:
        raise TimebaseJitterError(
            f"Time column of {path} is not uniformly sampled (relative jitter {jitter:.3g})",
            jitter=jitter,
        )
    series = [TimeSeries(label=label, dt=dt, samples=frame[label].to_numpy(dtype=float), t0=float(times[0])) for label in labels]
    logger.info("read %s: %d channel(s), %d samples, dt=%g s", path, len(labels), times.size, dt)
    return MultiChannelRecord.from_series(series, window=window)


def _write_frame(frame: pd.DataFrame, path: Path, comments: Optional[Mapping[str, object]] = None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            for key, value in (comments or {}).items():
                handle.write(f"# {key}={value}\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise OutputNotWritableError(f"Cannot write {path}: {exc}", hint="Check the output directory permissions.") from exc
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def write_csv(
    record: MultiChannelRecord | Iterable[TimeSeries],
    path: Path,
    comments: Optional[Mapping[str, object]] = None,
) -> Path:
    """Write channels sharing one time base as ``time,<labels...>``."""

    if not isinstance(record, MultiChannelRecord):
        record = MultiChannelRecord.from_series(list(record))
    first = next(iter(record))
    data = {TIME_COLUMN: first.times}
    for series in record:
        data[series.label] = series.samples
    return _write_frame(pd.DataFrame(data), path, comments)


def write_psd_csv(spectrum: SpectrumEstimate, path: Path, comments: Optional[Mapping[str, object]] = None) -> Path:
    header = {"resolution_bw": repr(spectrum.resolution_bw), **{k: v for k, v in spectrum.method.items()}, **(comments or {})}
    for i, line in enumerate(spectrum.lines):
        header[f"line{i}"] = f"{line.freq_hz!r}:{line.power!r}"
    return _write_frame(pd.DataFrame({"freq_hz": spectrum.freqs, "psd": spectrum.psd}), path, header)


def write_kurtosis_csv(trace: KurtosisTrace, path: Path, comments: Optional[Mapping[str, object]] = None) -> Path:
    header = {"window_len": trace.window_len, "hop": trace.hop, **(comments or {})}
    return _write_frame(pd.DataFrame({"time": trace.times, "kurtosis": trace.values}), path, header)


def write_point_kurtosis_csv(
    label: str, kurtosis: float, interval: Optional[KurtosisInterval], path: Path, comments: Optional[Mapping[str, object]] = None
) -> Path:
    row = {"label": [label], "kurtosis": [kurtosis]}
    if interval is not None:
        row.update({"ci_lower": [interval.lower], "ci_upper": [interval.upper], "ci_level": [interval.ci_level]})
    return _write_frame(pd.DataFrame(row), path, comments)


def write_histogram_csv(result: MonteCarloResult, path: Path, comments: Optional[Mapping[str, object]] = None) -> List[Path]:
    """Histogram table at ``path`` plus per-run values at ``<stem>.runs.csv``."""

    header = {
        "model": result.model,
        "runs": result.runs,
        "ci_level": result.ci_level,
        "ci_lower": repr(result.lower),
        "ci_upper": repr(result.upper),
        **(comments or {}),
    }
    hist = pd.DataFrame({"bin_left": result.bin_edges[:-1], "bin_right": result.bin_edges[1:], "count": result.counts})
    runs = pd.DataFrame({"run": np.arange(result.runs), "kurtosis": result.values})
    path = Path(path)
    return [_write_frame(hist, path, header), _write_frame(runs, path.with_name(f"{path.stem}.runs.csv"), {"model": result.model})]


def write_ranking_csv(ranking: SourceRanking, path: Path, comments: Optional[Mapping[str, object]] = None) -> Path:
    header = {"top_label": ranking.top_label, "flags": ",".join(ranking.flags) or "none", **(comments or {})}
    for label, reason in ranking.excluded.items():
        header[f"excluded.{label}"] = reason
    frame = pd.DataFrame(
        {
            "label": [e.label for e in ranking.entries],
            "kurtosis": [e.kurtosis for e in ranking.entries],
            "abs_kurtosis": [e.abs_kurtosis for e in ranking.entries],
            "rank": [e.rank for e in ranking.entries],
        }
    )
    return _write_frame(frame, path, header)
