"""Moment statistics of oscillation records and their closed-form references."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats as sp_stats
from scipy.signal import correlate

from .constants import KURTOSIS_FLOOR, MIN_KURTOSIS_SAMPLES, SINUSOID_KURTOSIS
from .errors import DegenerateInputError, InsufficientDataError, InvalidParamsError
from .logging_utils import get_logger
from .series import TimeSeries

logger = get_logger(__name__)

SeriesLike = Union[TimeSeries, np.ndarray]

# windows evaluated per vectorised batch in moving_kurtosis
_WINDOW_BATCH = 2048


def _values(series: SeriesLike) -> np.ndarray:
    values = series.samples if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise InvalidParamsError("Expected a 1-D sample array")
    if not np.all(np.isfinite(values)):
        raise InvalidParamsError("Series contains non-finite samples")
    return values


def _check_moment_input(values: np.ndarray, label: str = "series") -> None:
    if values.size < MIN_KURTOSIS_SAMPLES:
        raise InsufficientDataError(
            f"{label} has {values.size} samples; at least {MIN_KURTOSIS_SAMPLES} are required",
            detail={"samples": int(values.size), "required": MIN_KURTOSIS_SAMPLES},
        )
    if np.ptp(values) == 0.0:
        raise DegenerateInputError(f"{label} has zero variance")


def _label(series: SeriesLike) -> str:
    return f"channel {series.label!r}" if isinstance(series, TimeSeries) else "series"


def excess_kurtosis(series: SeriesLike) -> float:
    """Population excess kurtosis ``m4 / m2**2 - 3`` of the mean-removed samples.

    Raises
    ------
    InsufficientDataError
        Fewer than 100 samples.
    DegenerateInputError
        All samples equal.
    """
    values = _values(series)
    _check_moment_input(values, _label(series))
    value = float(sp_stats.kurtosis(values, fisher=True, bias=True))
    if not math.isfinite(value):
        raise DegenerateInputError(f"{_label(series)} has zero variance")
    return max(value, KURTOSIS_FLOOR)


@dataclass(frozen=True)
class KurtosisTrace:
    """Moving-window excess kurtosis.

    ``times`` are window-end time stamps; windows with zero variance carry NaN.
    """

    times: np.ndarray
    values: np.ndarray
    window_len: float
    hop: float

    def __len__(self) -> int:
        return int(self.times.size)

    def to_dict(self) -> Dict[str, object]:
        return {
            "window_len": self.window_len,
            "hop": self.hop,
            "times": self.times.tolist(),
            "values": [None if math.isnan(v) else float(v) for v in self.values],
        }


def _window_kurtosis(windows: np.ndarray) -> np.ndarray:
    mean = windows.mean(axis=1, keepdims=True)
    centered = windows - mean
    sq = centered * centered
    m2 = sq.mean(axis=1)
    m4 = (sq * sq).mean(axis=1)
    # relative tolerance against round-off in constant windows
    floor = (64.0 * np.finfo(float).eps * np.abs(mean[:, 0])) ** 2
    degenerate = (m2 <= floor) | (m2 == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        kurt = m4 / (m2 * m2) - 3.0
    kurt = np.maximum(kurt, KURTOSIS_FLOOR)
    kurt[degenerate] = np.nan
    return kurt


def moving_kurtosis(series: TimeSeries, window_len: float, hop: float) -> KurtosisTrace:
    """Excess kurtosis over sliding windows of ``window_len`` seconds every ``hop`` seconds."""

    if not (math.isfinite(window_len) and math.isfinite(hop)) or hop <= 0:
        raise InvalidParamsError(f"window_len and hop must be finite with hop > 0, got {window_len}, {hop}")
    width = int(round(window_len / series.dt))
    if width < MIN_KURTOSIS_SAMPLES:
        raise InvalidParamsError(
            f"window_len={window_len} s holds {width} samples; at least {MIN_KURTOSIS_SAMPLES} are required",
            hint=f"Use window_len >= {MIN_KURTOSIS_SAMPLES * series.dt:g} s at this sample rate.",
        )
    if width > len(series):
        raise InsufficientDataError(
            f"window_len={window_len} s exceeds the series length ({len(series) * series.dt:g} s)",
            detail={"window_samples": width, "samples": len(series)},
        )
    step = max(1, int(round(hop / series.dt)))
    windows = sliding_window_view(_values(series), width)[::step]
    values = np.concatenate(
        [_window_kurtosis(windows[i : i + _WINDOW_BATCH]) for i in range(0, windows.shape[0], _WINDOW_BATCH)]
    )
    ends = np.arange(windows.shape[0]) * step + width - 1
    times = series.t0 + ends * series.dt
    logger.debug("moving kurtosis over %d windows of %d samples", values.size, width)
    return KurtosisTrace(times=times, values=values, window_len=width * series.dt, hop=step * series.dt)


def autocorrelation(series: SeriesLike, max_lag: int) -> np.ndarray:
    """Biased autocovariance ``R[k] = sum(xc[t] xc[t+k]) / N`` for ``k = 0..max_lag``."""

    values = _values(series)
    _check_moment_input(values, _label(series))
    if isinstance(max_lag, bool) or int(max_lag) != max_lag or max_lag < 0:
        raise InvalidParamsError(f"max_lag must be a non-negative integer, got {max_lag!r}")
    if max_lag >= values.size:
        raise InvalidParamsError(f"max_lag={max_lag} must be smaller than the sample count {values.size}")
    centered = values - values.mean()
    n = centered.size
    full = correlate(centered, centered, mode="full", method="fft")
    return full[n - 1 : n + int(max_lag)] / n


def correlation_time(series: SeriesLike, dt: float = 1.0, max_lag: Optional[int] = None) -> float:
    """Lag at which the autocorrelation envelope first falls below ``1/e``.

    The envelope is the running maximum of ``|rho|`` over lags up to
    ``max_lag`` (default: the whole series), taken from long lags back to
    short ones, so oscillating correlations are measured by their decay
    rather than their first zero crossing. Returns ``(max_lag + 1) * dt``
    when the envelope has not decayed by ``max_lag``.
    """
    values = _values(series)
    horizon = values.size - 1 if max_lag is None else min(int(max_lag), values.size - 1)
    acov = autocorrelation(values, horizon)
    rho = np.abs(acov / acov[0])
    envelope = np.maximum.accumulate(rho[::-1])[::-1]
    below = np.nonzero(envelope < math.exp(-1.0))[0]
    lag = int(below[0]) if below.size else horizon + 1
    return lag * dt


@dataclass(frozen=True)
class LcSignatureParams:
    """Amplitude statistics of a noisy limit cycle ``(sqrt(gamma) + p) cos(phi)``."""

    radius_sq: float
    amp_variance: float

    def __post_init__(self) -> None:
        for name in ("radius_sq", "amp_variance"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidParamsError(f"LcSignatureParams.{name} must be finite and >= 0, got {value}")

    @property
    def amplitude_ratio(self) -> float:
        """``k = gamma / Var[p]``; infinite for a noiseless cycle."""
        return math.inf if self.amp_variance == 0 else self.radius_sq / self.amp_variance


@dataclass(frozen=True)
class ForcedSignatureParams:
    """Response amplitude and fluctuation variance of ``rho cos(W t) + x1``."""

    response_amp: float
    fluct_variance: float

    def __post_init__(self) -> None:
        for name in ("response_amp", "fluct_variance"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidParamsError(f"ForcedSignatureParams.{name} must be finite and >= 0, got {value}")


def analytic_kurtosis_limit_cycle(sig: LcSignatureParams) -> float:
    """Closed-form excess kurtosis of ``(sqrt(gamma) + p) cos(phi)``.

    Negative iff ``gamma / Var[p] > 1 + sqrt(2)``; tends to -3/2 for a
    noiseless cycle.
    """
    g, v = sig.radius_sq, sig.amp_variance
    if g == 0 and v == 0:
        raise DegenerateInputError("Limit-cycle signature with zero radius and zero amplitude variance")
    return -3.0 * ((g - v) ** 2 - 2.0 * v * v) / (2.0 * (g + v) ** 2)


def analytic_kurtosis_forced(sig: ForcedSignatureParams) -> float:
    """Closed-form excess kurtosis of ``rho cos(W t) + x1`` with Gaussian ``x1``."""

    rho, v = sig.response_amp, sig.fluct_variance
    if rho == 0 and v == 0:
        raise DegenerateInputError("Forced signature with zero response and zero fluctuation variance")
    if rho == 0:
        return 0.0
    return SINUSOID_KURTOSIS / (1.0 + 2.0 * v / (rho * rho)) ** 2


def limit_cycle_phase_diffusion(growth: float, noise_intensity: float) -> float:
    """Small-noise phase diffusion rate ``sigma^2 / gamma`` of the Hopf cycle (rad^2/s)."""

    if not (math.isfinite(growth) and growth > 0):
        raise InvalidParamsError(f"growth must be > 0, got {growth}")
    if not (math.isfinite(noise_intensity) and noise_intensity >= 0):
        raise InvalidParamsError(f"noise_intensity must be >= 0, got {noise_intensity}")
    return noise_intensity**2 / growth


def stationary_kurtosis_limit_cycle(growth: float, noise_intensity: float) -> float:
    """Excess kurtosis of ``x`` under the stationary law of the noisy Hopf normal form.

    The squared radius ``u = |z|^2`` is Gaussian with mean ``growth`` and
    standard deviation ``noise_intensity``, truncated at zero; the phase is
    uniform, so ``K = 1.5 E[u^2] / E[u]^2 - 3``. Tends to -3/2 as the noise
    vanishes and to ``0.75 pi - 3`` (a half-normal ``u``) when the noise dominates.
    """
    if not (math.isfinite(growth) and growth > 0):
        raise InvalidParamsError(f"growth must be > 0, got {growth}")
    if not (math.isfinite(noise_intensity) and noise_intensity >= 0):
        raise InvalidParamsError(f"noise_intensity must be >= 0, got {noise_intensity}")
    if noise_intensity == 0:
        return SINUSOID_KURTOSIS
    law = sp_stats.truncnorm(-growth / noise_intensity, np.inf, loc=growth, scale=noise_intensity)
    return 1.5 * float(law.moment(2)) / float(law.mean()) ** 2 - 3.0


@dataclass(frozen=True)
class AmplitudePhaseEstimate:
    """Empirical amplitude/phase statistics of a planar limit-cycle path."""

    radius_sq: float
    amp_variance: float
    amp_decay: float
    phase_diff: float
    mean_freq: float

    @property
    def signature(self) -> LcSignatureParams:
        return LcSignatureParams(radius_sq=self.radius_sq, amp_variance=self.amp_variance)

    @property
    def amp_noise(self) -> float:
        """OU intensity ``sigma_p^2`` implied by ``Var[p] = sigma_p^2 / (2 a)``."""
        return 2.0 * self.amp_decay * self.amp_variance

    def to_dict(self) -> Dict[str, float]:
        return {
            "radius_sq": self.radius_sq,
            "amp_variance": self.amp_variance,
            "amp_decay": self.amp_decay,
            "phase_diff": self.phase_diff,
            "mean_freq": self.mean_freq,
        }


def estimate_amplitude_phase(x: TimeSeries, y: TimeSeries, lag_s: float = 10.0) -> AmplitudePhaseEstimate:
    """Split a planar path into radius fluctuation ``p`` and phase ``phi``.

    ``radius_sq`` is the squared mean radius, ``amp_decay`` comes from the
    lag-one autocorrelation of the radius, and ``phase_diff`` is the variance
    rate of the detrended phase increments over ``lag_s`` seconds.
    """
    if len(x) != len(y) or not math.isclose(x.dt, y.dt, rel_tol=1e-9):
        raise InvalidParamsError("x and y must share length and sample interval")
    radius = np.hypot(_values(x), _values(y))
    _check_moment_input(radius, "radius")
    phase = np.unwrap(np.arctan2(y.samples, x.samples))
    lag = max(1, int(round(lag_s / x.dt)))
    if lag >= radius.size:
        raise InsufficientDataError(f"Phase lag {lag_s} s exceeds the record length")
    increments = phase[lag:] - phase[:-lag]
    mean_freq = float(increments.mean() / (lag * x.dt))
    phase_diff = float(increments.var() / (lag * x.dt))
    acov = autocorrelation(radius, 1)
    rho1 = acov[1] / acov[0]
    amp_decay = -math.log(rho1) / x.dt if 0.0 < rho1 < 1.0 else math.nan
    return AmplitudePhaseEstimate(
        radius_sq=float(radius.mean() ** 2),
        amp_variance=float(radius.var()),
        amp_decay=amp_decay,
        phase_diff=phase_diff,
        mean_freq=mean_freq,
    )
