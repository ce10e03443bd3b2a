"""Measurement noise injection and signal-to-noise bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError
from .logging_utils import get_logger
from .series import MultiChannelRecord

logger = get_logger(__name__)

# extra entropy word separating measurement noise from the process-noise streams
MEASUREMENT_NOISE_KEY = 0x6D6561737572


def measurement_rng(seed: int, index: int) -> np.random.Generator:
    """Philox stream of measurement noise for channel or run ``index``."""

    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), MEASUREMENT_NOISE_KEY], spawn_key=(int(index),))))


@dataclass(frozen=True)
class NoiseSpec:
    """White Gaussian measurement noise of standard deviation ``std``."""

    std: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.std) and self.std >= 0):
            raise InvalidParamsError(f"NoiseSpec.std must be finite and >= 0, got {self.std}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParamsError(f"NoiseSpec.seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"std": self.std, "seed": self.seed}


def add_measurement_noise(record: MultiChannelRecord, spec: NoiseSpec) -> MultiChannelRecord:
    """Add i.i.d. Gaussian noise to every sample of every channel.

    Channel ``i`` (in record order) draws from ``measurement_rng(spec.seed, i)``,
    so channels get independent noise and adding or dropping a later channel
    leaves earlier ones unchanged.
    """
    if spec.std == 0:
        return record
    noisy = []
    for index, series in enumerate(record):
        rng = measurement_rng(spec.seed, index)
        noisy.append(series.with_samples(series.samples + spec.std * rng.standard_normal(len(series))))
    logger.debug("added measurement noise std=%g to %d channel(s)", spec.std, len(noisy))
    return record.replace_channels(noisy)


def snr_db(amplitude: float, noise_variance: float) -> float:
    """SNR of a sinusoid of ``amplitude`` against noise of ``noise_variance``: ``10 log10((A^2 / 2) / var)``."""

    if not (math.isfinite(amplitude) and amplitude > 0):
        raise InvalidParamsError(f"amplitude must be > 0, got {amplitude}")
    if not (math.isfinite(noise_variance) and noise_variance > 0):
        raise InvalidParamsError(f"noise_variance must be > 0, got {noise_variance}")
    return 10.0 * math.log10(amplitude * amplitude / 2.0 / noise_variance)
