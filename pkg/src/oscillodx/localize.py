"""Oscillation source ranking across the channels of a record."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import VARIANCE_DISPARITY_RATIO
from .errors import DegenerateInputError, InsufficientDataError, OscillodxError
from .logging_utils import get_logger
from .series import MultiChannelRecord, TimeSeries
from .stats import excess_kurtosis

logger = get_logger(__name__)

FLAG_TIE = "tie"
FLAG_NON_INFORMATIVE = "non_informative"
FLAG_VARIANCE_DISPARITY = "variance_disparity"
FLAG_EXCLUDED = "excluded_channels"


@dataclass(frozen=True)
class RankEntry:
    label: str
    kurtosis: float
    abs_kurtosis: float
    rank: int
    variance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kurtosis": self.kurtosis,
            "abs_kurtosis": self.abs_kurtosis,
            "rank": self.rank,
            "variance": self.variance,
        }


@dataclass(frozen=True)
class SourceRanking:
    """Channels ordered by descending ``|excess kurtosis|``; rank 1 is the likely source."""

    entries: Tuple[RankEntry, ...]
    flags: Tuple[str, ...] = ()
    excluded: Dict[str, str] = field(default_factory=dict)
    window: Optional[Tuple[float, float]] = None

    @property
    def top_label(self) -> str:
        return self.entries[0].label

    @property
    def labels(self) -> List[str]:
        return [entry.label for entry in self.entries]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "top_label": self.top_label,
            "entries": [entry.to_dict() for entry in self.entries],
            "flags": list(self.flags),
            "excluded": dict(self.excluded),
            "window": list(self.window) if self.window is not None else None,
        }


def _channel_stats(series: TimeSeries) -> Tuple[str, Optional[Tuple[float, float]], Optional[str]]:
    try:
        return series.label, (excess_kurtosis(series), float(np.var(series.samples))), None
    except (DegenerateInputError, InsufficientDataError) as exc:
        return series.label, None, exc.message


def rank_sources(
    record: MultiChannelRecord,
    kurtosis_threshold: float = 0.45,
    window: Optional[Tuple[float, float]] = None,
    workers: Optional[int] = None,
) -> SourceRanking:
    """Rank channels by ``|excess kurtosis|`` over ``window`` (default: ``record.window``).

    Degenerate or too-short channels are excluded and listed in ``excluded``;
    ranking proceeds while at least two channels remain. Equal magnitudes
    are ordered by label and raise the ``tie`` flag, so the ranking does not
    depend on the column order of the record.

    Raises
    ------
    InsufficientDataError
        Fewer than two channels survive.
    """
    span = window if window is not None else record.window
    segments = [series.window(span) for series in record]
    if len(segments) < 2:
        raise InsufficientDataError(f"Source ranking needs at least two channels, got {len(segments)}")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(_channel_stats, segments))

    kept = [(label, stats) for label, stats, _ in results if stats is not None]
    excluded = {label: reason for label, stats, reason in results if stats is None}
    if len(kept) < 2:
        raise InsufficientDataError(
            f"Only {len(kept)} channel(s) usable for ranking",
            detail={"excluded": excluded},
        )
    kept.sort(key=lambda item: (-abs(item[1][0]), item[0]))
    entries = tuple(
        RankEntry(label=label, kurtosis=k, abs_kurtosis=abs(k), rank=i + 1, variance=v)
        for i, (label, (k, v)) in enumerate(kept)
    )

    flags: List[str] = []
    magnitudes = [entry.abs_kurtosis for entry in entries]
    if any(math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15) for a, b in zip(magnitudes, magnitudes[1:])):
        flags.append(FLAG_TIE)
    if magnitudes[0] < kurtosis_threshold:
        flags.append(FLAG_NON_INFORMATIVE)
    variances = [entry.variance for entry in entries]
    if max(variances) > VARIANCE_DISPARITY_RATIO * min(variances):
        flags.append(FLAG_VARIANCE_DISPARITY)
    if excluded:
        flags.append(FLAG_EXCLUDED)
        logger.warning("excluded from ranking: %s", ", ".join(sorted(excluded)))
    logger.info("source ranking: top=%s flags=%s", entries[0].label, flags or "none")
    return SourceRanking(entries=entries, flags=tuple(flags), excluded=excluded, window=span)


def rank_or_none(
    record: MultiChannelRecord, kurtosis_threshold: float, window: Optional[Tuple[float, float]] = None
) -> Optional[SourceRanking]:
    """Ranking for reports; ``None`` for single-channel records or when ranking is impossible."""

    if len(record) < 2:
        return None
    try:
        return rank_sources(record, kurtosis_threshold, window=window)
    except OscillodxError as exc:
        logger.warning("source ranking skipped: %s", exc.message)
        return None
