"""Spectral estimates and closed-form spectra of the oscillation models.

Everything is reported as a one-sided density over frequency in Hz. The
closed forms are written for a two-sided density over angular frequency
``S(w)`` and converted with ``psd(f) = 2 * 2*pi * S(2*pi*f)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import get_window, welch

from .constants import MIN_SEGMENT_LEN
from .errors import InsufficientDataError, InvalidParamsError
from .logging_utils import get_logger
from .models import ForcedParams, WeaklyDampedParams, forced_response_amplitude
from .series import TimeSeries

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpectralLine:
    """Discrete spectral component: total power concentrated at one frequency."""

    freq_hz: float
    power: float

    def to_dict(self) -> Dict[str, float]:
        return {"freq_hz": self.freq_hz, "power": self.power}


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided PSD on an ascending Hz grid plus any discrete lines."""

    freqs: np.ndarray
    psd: np.ndarray
    resolution_bw: float
    method: Mapping[str, Any] = field(default_factory=dict)
    lines: Tuple[SpectralLine, ...] = ()

    def __post_init__(self) -> None:
        freqs = np.array(self.freqs, dtype=float)
        psd = np.array(self.psd, dtype=float)
        if freqs.ndim != 1 or freqs.shape != psd.shape or freqs.size < 2:
            raise InvalidParamsError("freqs and psd must be 1-D arrays of equal length >= 2")
        if not np.all(np.diff(freqs) > 0) or freqs[0] < 0:
            raise InvalidParamsError("freqs must be non-negative and strictly increasing")
        if not np.all(np.isfinite(psd)) or np.any(psd < 0):
            raise InvalidParamsError("psd values must be finite and >= 0")
        if not (math.isfinite(self.resolution_bw) and self.resolution_bw > 0):
            raise InvalidParamsError(f"resolution_bw must be > 0, got {self.resolution_bw}")
        freqs.setflags(write=False)
        psd.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "psd", psd)
        object.__setattr__(self, "method", dict(self.method))
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self) -> int:
        return int(self.freqs.size)

    def continuous_power(self, band: Optional[Tuple[float, float]] = None) -> float:
        """Trapezoid integral of the density, optionally over ``band`` (Hz)."""
        if band is None:
            return float(trapezoid(self.psd, self.freqs))
        lo, hi = band
        mask = (self.freqs >= lo) & (self.freqs <= hi)
        if mask.sum() < 2:
            return 0.0
        return float(trapezoid(self.psd[mask], self.freqs[mask]))

    def total_power(self) -> float:
        return self.continuous_power() + sum(line.power for line in self.lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "resolution_bw": self.resolution_bw,
            "method": dict(self.method),
            "lines": [line.to_dict() for line in self.lines],
            "n_bins": len(self),
        }


def welch_psd(
    series: TimeSeries,
    segment_len: Optional[int] = None,
    overlap_frac: float = 0.5,
    taper: str = "hann",
) -> SpectrumEstimate:
    """Averaged tapered periodogram (Welch) of the mean-removed series.

    Parameters
    ----------
    segment_len:
        Samples per segment; defaults to one eighth of the series.
    overlap_frac:
        Fractional overlap of consecutive segments, ``0 <= overlap_frac < 1``.
    taper:
        Any window name understood by :func:`scipy.signal.get_window`.

    Notes
    -----
    ``resolution_bw`` is the bin spacing ``fs / segment_len``. The taper's
    equivalent noise bandwidth is kept in ``method["enbw_hz"]``.
    """
    n = len(series)
    nperseg = n // 8 if segment_len is None else segment_len
    if isinstance(nperseg, bool) or int(nperseg) != nperseg:
        raise InvalidParamsError(f"segment_len must be an integer, got {segment_len!r}")
    nperseg = int(nperseg)
    if nperseg < MIN_SEGMENT_LEN:
        raise InvalidParamsError(
            f"Segment of {nperseg} samples is shorter than the minimum {MIN_SEGMENT_LEN}",
            detail={"segment_len": nperseg, "samples": n},
        )
    if nperseg > n:
        raise InsufficientDataError(
            f"Segment of {nperseg} samples exceeds the series length {n}",
            detail={"segment_len": nperseg, "samples": n},
        )
    if not (math.isfinite(overlap_frac) and 0.0 <= overlap_frac < 1.0):
        raise InvalidParamsError(f"overlap_frac must be in [0, 1), got {overlap_frac}")
    try:
        window = get_window(taper, nperseg)
    except (ValueError, TypeError) as exc:
        raise InvalidParamsError(f"Unknown taper {taper!r}: {exc}") from exc
    noverlap = min(int(round(overlap_frac * nperseg)), nperseg - 1)
    values = series.samples - series.samples.mean()
    freqs, psd = welch(
        values,
        fs=series.fs,
        window=window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend="constant",
        return_onesided=True,
        scaling="density",
    )
    n_segments = 1 + (n - nperseg) // (nperseg - noverlap)
    enbw = series.fs * float(np.sum(window**2) / np.sum(window) ** 2)
    method = {
        "estimator": "welch",
        "segment_len": nperseg,
        "overlap": noverlap / nperseg,
        "taper": taper,
        "segments": n_segments,
        "enbw_hz": enbw,
    }
    logger.debug("welch psd: %d samples, segment %d, %d segments", n, nperseg, n_segments)
    return SpectrumEstimate(freqs=freqs, psd=np.maximum(psd, 0.0), resolution_bw=series.fs / nperseg, method=method)


def _grid(freqs: Sequence[float] | np.ndarray) -> Tuple[np.ndarray, float]:
    grid = np.asarray(freqs, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidParamsError("Frequency grid needs at least two points")
    if not np.all(np.isfinite(grid)) or grid[0] < 0 or not np.all(np.diff(grid) > 0):
        raise InvalidParamsError("Frequency grid must be finite, non-negative and strictly increasing")
    return grid, float(np.min(np.diff(grid)))


def weakly_damped_density(omega: np.ndarray, damping: float, natural_freq: float, noise_intensity: float) -> np.ndarray:
    """Two-sided angular density of ``x`` for the noise-driven damped rotation."""

    g2w2 = damping**2 + natural_freq**2
    w2 = omega * omega
    return noise_intensity**2 * (g2w2 + w2) / (TWO_PI * ((g2w2 - w2) ** 2 + 4.0 * damping**2 * w2))


def phase_diffusion_density(omega: np.ndarray, width: float, center: float) -> np.ndarray:
    """Two-sided angular density of ``cos(phi)`` for a phase diffusing at rate ``width``.

    The density integrates to 1/2 over all ``omega`` and its half-power
    full width around ``center`` is ``width``.
    """
    w2 = omega * omega
    quarter = width * width / 4.0
    den = (w2 - center * center - quarter) ** 2 + width * width * w2
    return width * (w2 + center * center + quarter) / (2.0 * TWO_PI * den)


def _to_one_sided_hz(density: np.ndarray) -> np.ndarray:
    return 2.0 * TWO_PI * density


def analytic_psd_weakly_damped(params: WeaklyDampedParams, freqs: Sequence[float] | np.ndarray) -> SpectrumEstimate:
    grid, spacing = _grid(freqs)
    psd = _to_one_sided_hz(weakly_damped_density(TWO_PI * grid, params.damping, params.natural_freq, params.noise_intensity))
    return SpectrumEstimate(
        freqs=grid,
        psd=psd,
        resolution_bw=spacing,
        method={"estimator": "analytic", "model": "wd", **params.to_dict()},
    )


def analytic_psd_limit_cycle(
    radius_sq: float,
    amp_decay: float,
    phase_diff: float,
    hopf_freq: float,
    amp_noise: float,
    freqs: Sequence[float] | np.ndarray,
) -> SpectrumEstimate:
    """PSD of ``(sqrt(gamma) + p) cos(phi)``.

    The first term is the coherent cycle of power ``gamma / 2`` broadened by
    phase diffusion; the second is the amplitude fluctuation ``p`` (an OU of
    decay ``amp_decay`` and intensity ``amp_noise``) riding on the carrier,
    broadened further by ``2 * amp_decay``.
    """
    for name, value in (("amp_decay", amp_decay), ("phase_diff", phase_diff), ("hopf_freq", hopf_freq)):
        if not (math.isfinite(value) and value > 0):
            raise InvalidParamsError(f"{name} must be > 0, got {value}")
    for name, value in (("radius_sq", radius_sq), ("amp_noise", amp_noise)):
        if not (math.isfinite(value) and value >= 0):
            raise InvalidParamsError(f"{name} must be >= 0, got {value}")
    grid, spacing = _grid(freqs)
    omega = TWO_PI * grid
    density = radius_sq * phase_diffusion_density(omega, phase_diff, hopf_freq)
    density = density + amp_noise / (2.0 * amp_decay) * phase_diffusion_density(omega, phase_diff + 2.0 * amp_decay, hopf_freq)
    return SpectrumEstimate(
        freqs=grid,
        psd=_to_one_sided_hz(density),
        resolution_bw=spacing,
        method={
            "estimator": "analytic",
            "model": "lc",
            "radius_sq": radius_sq,
            "amp_decay": amp_decay,
            "phase_diff": phase_diff,
            "hopf_freq": hopf_freq,
            "amp_noise": amp_noise,
        },
    )


def analytic_psd_forced(params: ForcedParams, freqs: Sequence[float] | np.ndarray) -> SpectrumEstimate:
    """Continuous OU part on the grid plus a line of power ``rho^2 / 2`` at the forcing frequency."""

    continuous = analytic_psd_weakly_damped(params.unforced, freqs)
    rho = forced_response_amplitude(params)
    line = SpectralLine(freq_hz=params.force_freq / TWO_PI, power=rho * rho / 2.0)
    return SpectrumEstimate(
        freqs=continuous.freqs,
        psd=continuous.psd,
        resolution_bw=continuous.resolution_bw,
        method={"estimator": "analytic", "model": "forced", **params.to_dict()},
        lines=(line,),
    )
