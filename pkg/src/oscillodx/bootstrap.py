"""Moving-block bootstrap interval for the excess kurtosis of one series."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .constants import KURTOSIS_FLOOR, MIN_BOOTSTRAP_REPS, MIN_BOOTSTRAP_SAMPLES
from .errors import DegenerateInputError, InsufficientDataError, InvalidParamsError
from .logging_utils import get_logger
from .series import TimeSeries
from .stats import correlation_time

logger = get_logger(__name__)

# block length in correlation times
BLOCK_CORRELATION_TIMES = 10
# every replicate is stitched from at least this many blocks
MIN_BLOCKS = 50


@dataclass(frozen=True)
class KurtosisInterval:
    """Percentile interval of the bootstrap kurtosis distribution."""

    lower: float
    upper: float
    ci_level: float
    reps: int
    block_len: int
    corr_time: Optional[float]

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> Dict[str, float]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "ci_level": self.ci_level,
            "reps": self.reps,
            "block_len": self.block_len,
            "corr_time": self.corr_time,
        }


def block_length(corr_samples: float, n: int) -> int:
    """Block length in samples: ten correlation times, capped so ``n`` holds ``MIN_BLOCKS`` blocks."""

    return int(min(max(1, math.ceil(BLOCK_CORRELATION_TIMES * corr_samples)), _longest_block(n)))


def _longest_block(n: int) -> int:
    return max(1, n // MIN_BLOCKS)


def bootstrap_kurtosis_ci(
    series: TimeSeries,
    reps: int,
    ci_level: float,
    seed: int = 0,
    block_len: Optional[int] = None,
) -> KurtosisInterval:
    """Moving-block bootstrap percentile interval of the excess kurtosis.

    Each replicate concatenates ``N // block_len`` blocks drawn with
    replacement from all overlapping blocks. Block sums of the first four
    powers come from prefix sums, so a replicate costs one gather per block.
    """
    if isinstance(reps, bool) or int(reps) != reps or reps < MIN_BOOTSTRAP_REPS:
        raise InvalidParamsError(f"reps must be an integer >= {MIN_BOOTSTRAP_REPS}, got {reps!r}")
    if not (0.0 < ci_level < 1.0):
        raise InvalidParamsError(f"ci_level must lie in (0, 1), got {ci_level}")
    n = len(series)
    if n < MIN_BOOTSTRAP_SAMPLES:
        raise InsufficientDataError(
            f"Bootstrap needs at least {MIN_BOOTSTRAP_SAMPLES} samples, got {n}",
            detail={"samples": n, "required": MIN_BOOTSTRAP_SAMPLES},
        )
    values = series.samples
    if np.ptp(values) == 0.0:
        raise DegenerateInputError(f"channel {series.label!r} has zero variance")

    corr_time: Optional[float] = None
    if block_len is None:
        corr_samples = correlation_time(values, max_lag=_longest_block(n))
        corr_time = corr_samples * series.dt
        length = block_length(corr_samples, n)
    else:
        length = int(block_len)
    if not 1 <= length <= n:
        raise InvalidParamsError(f"block_len must lie in [1, {n}], got {block_len}")
    n_blocks = n // length
    centered = values - values.mean()
    powers = np.stack([centered, centered**2, centered**3, centered**4])
    prefix = np.concatenate([np.zeros((4, 1)), np.cumsum(powers, axis=1)], axis=1)
    block_sums = prefix[:, length:] - prefix[:, : n - length + 1]

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    starts = rng.integers(0, n - length + 1, size=(int(reps), n_blocks))
    raw = block_sums[:, starts].sum(axis=2) / (n_blocks * length)
    m1, m2r, m3r, m4r = raw
    var = m2r - m1**2
    m4 = m4r - 4.0 * m1 * m3r + 6.0 * m1**2 * m2r - 3.0 * m1**4
    with np.errstate(divide="ignore", invalid="ignore"):
        kurt = m4 / (var * var) - 3.0
    kurt = kurt[np.isfinite(kurt)]
    if kurt.size == 0:
        raise DegenerateInputError(f"channel {series.label!r}: every bootstrap replicate was degenerate")
    kurt = np.maximum(kurt, KURTOSIS_FLOOR)
    tail = (1.0 - ci_level) / 2.0
    lower, upper = np.quantile(kurt, [tail, 1.0 - tail])
    logger.debug("bootstrap: %d reps, block %d samples, %d blocks", reps, length, n_blocks)
    return KurtosisInterval(
        lower=float(lower),
        upper=float(upper),
        ci_level=float(ci_level),
        reps=int(reps),
        block_len=length,
        corr_time=corr_time,
    )
