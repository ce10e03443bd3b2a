"""Uniformly sampled channels and multi-channel records."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidParamsError, WindowError

Window = Tuple[float, float]


def _frozen_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Scalar channel sampled every ``dt`` seconds starting at ``t0``.

    Samples are copied on construction and stored read-only, so instances
    can be shared between threads.
    """

    label: str
    dt: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParamsError(f"Sample interval must be positive and finite, got {self.dt!r}")
        if not math.isfinite(self.t0):
            raise InvalidParamsError(f"Start time must be finite, got {self.t0!r}")
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidParamsError(f"Channel {self.label!r} needs a non-empty 1-D sample array")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def fs(self) -> float:
        return 1.0 / self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def end_time(self) -> float:
        """Time stamp of the last sample."""
        return self.t0 + self.dt * (self.samples.size - 1)

    def with_samples(self, samples: np.ndarray, label: Optional[str] = None) -> "TimeSeries":
        return TimeSeries(label=label or self.label, dt=self.dt, samples=samples, t0=self.t0)

    def window(self, window: Optional[Window]) -> "TimeSeries":
        """Return the samples whose time stamps lie in ``[start, end]``.

        Window bounds are absolute seconds on the series' own time axis.
        """
        if window is None:
            return self
        start, end = float(window[0]), float(window[1])
        if not (math.isfinite(start) and math.isfinite(end)) or end <= start:
            raise WindowError(f"Invalid window {start}:{end}")
        tol = 1e-9 * max(1.0, abs(self.end_time))
        if start < self.t0 - tol or end > self.end_time + tol:
            raise WindowError(
                f"Window {start}:{end} s lies outside series {self.label!r} "
                f"covering {self.t0}:{self.end_time} s",
                detail={"series_start": self.t0, "series_end": self.end_time},
            )
        first = int(math.ceil((start - self.t0) / self.dt - 1e-9))
        last = int(math.floor((end - self.t0) / self.dt + 1e-9))
        first = max(first, 0)
        last = min(last, self.samples.size - 1)
        if last < first:
            raise WindowError(f"Window {start}:{end} s contains no samples of {self.label!r}")
        return TimeSeries(label=self.label, dt=self.dt, samples=self.samples[first : last + 1], t0=self.t0 + first * self.dt)


@dataclass(frozen=True)
class MultiChannelRecord:
    """Labelled channels sharing one time base.

    ``window`` is the default analysis segment (absolute seconds) used by
    the source ranking; ``None`` means the whole record.
    """

    channels: Dict[str, TimeSeries]
    window: Optional[Window] = None
    _order: Tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        channels = dict(self.channels)
        if not channels:
            raise InvalidParamsError("A record needs at least one channel")
        labels = list(channels)
        for key, series in channels.items():
            if key != series.label:
                raise InvalidParamsError(f"Channel key {key!r} does not match series label {series.label!r}")
        first = channels[labels[0]]
        for series in channels.values():
            if not math.isclose(series.dt, first.dt, rel_tol=1e-9):
                raise InvalidParamsError("All channels must share the same sample interval")
            if len(series) != len(first):
                raise InvalidParamsError("All channels must have the same number of samples")
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "_order", tuple(labels))

    @classmethod
    def from_series(cls, series: Sequence[TimeSeries], window: Optional[Window] = None) -> "MultiChannelRecord":
        labels = [s.label for s in series]
        if len(set(labels)) != len(labels):
            raise InvalidParamsError(f"Channel labels must be unique, got {labels}")
        return cls(channels={s.label: s for s in series}, window=window)

    @property
    def labels(self) -> List[str]:
        return list(self._order)

    @property
    def dt(self) -> float:
        return self.channels[self._order[0]].dt

    @property
    def t0(self) -> float:
        return self.channels[self._order[0]].t0

    def __len__(self) -> int:
        return len(self._order)

    def __iter__(self) -> Iterator[TimeSeries]:
        return (self.channels[label] for label in self._order)

    def __getitem__(self, label: str) -> TimeSeries:
        try:
            return self.channels[label]
        except KeyError as exc:
            raise InvalidParamsError(f"Unknown channel {label!r}; available: {self.labels}") from exc

    def replace_channels(self, series: Sequence[TimeSeries]) -> "MultiChannelRecord":
        return MultiChannelRecord.from_series(series, window=self.window)
