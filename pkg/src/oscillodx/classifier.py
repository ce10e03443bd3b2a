"""Diagnosis of the mechanism behind a sustained oscillation.

The decision runs in three gates:

1. No PSD peak at least ``peak_snr_min`` dB above the spectral median
   means ``no_oscillation``.
2. ``|kurtosis| < kurtosis_threshold`` means a Gaussian signature,
   which is a ``weakly_damped`` mode.
3. Otherwise the width of the spectral peak separates a ``forced``
   oscillation (a thin spike no wider than ``spike_bw_ratio_max`` resolution
   bins) from a ``limit_cycle`` (broadened by phase diffusion).

A bootstrap interval of the kurtosis that straddles ``±kurtosis_threshold``
makes the verdict ``inconclusive``; both branch outcomes are kept in the
notes.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

from .bootstrap import KurtosisInterval, bootstrap_kurtosis_ci
from .constants import (
    DIAGNOSIS_SCHEMA_VERSION,
    MIN_BOOTSTRAP_REPS,
    MIN_CLASSIFY_SAMPLES,
    MIN_SPECTRUM_BINS,
    VERDICT_FORCED,
    VERDICT_INCONCLUSIVE,
    VERDICT_LIMIT_CYCLE,
    VERDICT_NO_OSCILLATION,
    VERDICT_WEAKLY_DAMPED,
)
from .errors import InsufficientDataError, InvalidParamsError
from .logging_utils import get_logger
from .series import TimeSeries, Window
from .spectrum import SpectrumEstimate, welch_psd
from .stats import excess_kurtosis

if TYPE_CHECKING:
    from .localize import SourceRanking

logger = get_logger(__name__)

# bins either side of the peak checked for a broadband pedestal
SHOULDER_BINS = 5
# default spike-test segment, as a fraction of the analysis window
DEFAULT_SEGMENT_FRACTION = 0.25


@dataclass(frozen=True)
class DiagnosisConfig:
    """Thresholds and estimator settings of the diagnosis."""

    kurtosis_threshold: float = 0.45
    window: Optional[Window] = None
    spike_bw_ratio_max: float = 3.0
    peak_snr_min: float = 10.0
    bootstrap_reps: int = 200
    ci_level: float = 0.90
    psd_segment_s: Optional[float] = None
    psd_overlap: float = 0.5
    taper: str = "hann"
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kurtosis_threshold) and self.kurtosis_threshold > 0):
            raise InvalidParamsError(f"kurtosis_threshold must be > 0, got {self.kurtosis_threshold}")
        if not (math.isfinite(self.spike_bw_ratio_max) and self.spike_bw_ratio_max >= 1):
            raise InvalidParamsError(f"spike_bw_ratio_max must be >= 1, got {self.spike_bw_ratio_max}")
        if not math.isfinite(self.peak_snr_min):
            raise InvalidParamsError(f"peak_snr_min must be finite, got {self.peak_snr_min}")
        if isinstance(self.bootstrap_reps, bool) or int(self.bootstrap_reps) != self.bootstrap_reps or self.bootstrap_reps < MIN_BOOTSTRAP_REPS:
            raise InvalidParamsError(f"bootstrap_reps must be an integer >= {MIN_BOOTSTRAP_REPS}, got {self.bootstrap_reps!r}")
        if not (0.0 < self.ci_level < 1.0):
            raise InvalidParamsError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.psd_segment_s is not None and not (math.isfinite(self.psd_segment_s) and self.psd_segment_s > 0):
            raise InvalidParamsError(f"psd_segment_s must be > 0, got {self.psd_segment_s}")
        if not (0.0 <= self.psd_overlap < 1.0):
            raise InvalidParamsError(f"psd_overlap must lie in [0, 1), got {self.psd_overlap}")
        if self.window is not None:
            start, end = self.window
            if not (math.isfinite(start) and math.isfinite(end) and end > start):
                raise InvalidParamsError(f"window must satisfy start < end, got {self.window}")
            object.__setattr__(self, "window", (float(start), float(end)))
        object.__setattr__(self, "bootstrap_reps", int(self.bootstrap_reps))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["window"] = list(self.window) if self.window is not None else None
        return data


@dataclass(frozen=True)
class SpikeMetrics:
    """Location, prominence and width of the dominant PSD peak."""

    peak_freq: float
    peak_snr: float
    halfpower_bw: float
    bw_ratio: float
    resolution_bw: float
    noise_floor: float
    present: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _crossing(f_a: float, p_a: float, f_b: float, p_b: float, level: float) -> float:
    if p_a == p_b:
        return 0.5 * (f_a + f_b)
    return f_a + (level - p_a) * (f_b - f_a) / (p_b - p_a)


def spike_metrics(spectrum: SpectrumEstimate, peak_snr_min: float = 10.0) -> SpikeMetrics:
    """Measure the global PSD maximum against the median floor.

    The zero-frequency bin is ignored. ``halfpower_bw`` is the full width
    where the PSD stays above half the peak, with linear interpolation
    between bins. ``present`` is False when the peak does not clear
    ``peak_snr_min`` dB; the other fields are still filled in.
    """
    if len(spectrum) < MIN_SPECTRUM_BINS:
        raise InsufficientDataError(
            f"Spectrum has {len(spectrum)} bins; at least {MIN_SPECTRUM_BINS} are required",
            detail={"bins": len(spectrum), "required": MIN_SPECTRUM_BINS},
        )
    freqs, psd = spectrum.freqs, spectrum.psd
    body = psd[1:]
    floor = max(float(np.median(body)), float(np.finfo(float).tiny))
    peak_idx = 1 + int(np.argmax(body))
    peak = float(psd[peak_idx])
    if peak <= 0:
        return SpikeMetrics(
            peak_freq=float(freqs[peak_idx]),
            peak_snr=0.0,
            halfpower_bw=0.0,
            bw_ratio=1.0,
            resolution_bw=spectrum.resolution_bw,
            noise_floor=floor,
            present=False,
        )
    snr = 10.0 * math.log10(peak / floor)
    half = peak / 2.0

    below_left = np.nonzero(psd[:peak_idx] < half)[0]
    if below_left.size:
        k = int(below_left[-1])
        f_left = _crossing(freqs[k], psd[k], freqs[k + 1], psd[k + 1], half)
    else:
        f_left = float(freqs[0])
    below_right = np.nonzero(psd[peak_idx + 1 :] < half)[0]
    if below_right.size:
        k = peak_idx + 1 + int(below_right[0])
        f_right = _crossing(freqs[k - 1], psd[k - 1], freqs[k], psd[k], half)
    else:
        f_right = float(freqs[-1])
    width = max(0.0, float(f_right - f_left))
    return SpikeMetrics(
        peak_freq=float(freqs[peak_idx]),
        peak_snr=snr,
        halfpower_bw=width,
        bw_ratio=max(1.0, width / spectrum.resolution_bw),
        resolution_bw=spectrum.resolution_bw,
        noise_floor=floor,
        present=snr >= peak_snr_min,
    )


def decide(
    kurtosis: float,
    ci: Tuple[float, float],
    peak_snr: float,
    bw_ratio: Optional[float],
    cfg: DiagnosisConfig,
) -> Tuple[str, List[str]]:
    """Decision table of the diagnosis.

    ``bw_ratio`` is only consulted on the non-Gaussian branch and may be
    ``None`` when the kurtosis gate settles the verdict.

    Returns
    -------
    Tuple[str, List[str]]
        Verdict and machine-readable notes (``code`` or ``code=value``).
    """
    eps = cfg.kurtosis_threshold
    if peak_snr < cfg.peak_snr_min:
        return VERDICT_NO_OSCILLATION, ["no_spectral_peak", f"peak_snr={peak_snr:.3f}"]

    def spectral_branch() -> str:
        if bw_ratio is None:
            raise InvalidParamsError("bw_ratio is required to separate forced from limit-cycle oscillations")
        return VERDICT_FORCED if bw_ratio <= cfg.spike_bw_ratio_max else VERDICT_LIMIT_CYCLE

    lower, upper = ci
    straddles = any(lower < edge < upper for edge in (-eps, eps))
    if straddles:
        return VERDICT_INCONCLUSIVE, [
            "kurtosis_ci_straddles_threshold",
            f"branch_gaussian={VERDICT_WEAKLY_DAMPED}",
            f"branch_non_gaussian={spectral_branch()}",
            f"point_estimate_branch={VERDICT_WEAKLY_DAMPED if abs(kurtosis) < eps else spectral_branch()}",
        ]
    if abs(kurtosis) < eps:
        return VERDICT_WEAKLY_DAMPED, ["gaussian_signature"]
    verdict = spectral_branch()
    note = "thin_spike" if verdict == VERDICT_FORCED else "broadband_peak"
    return verdict, ["non_gaussian_signature", note, f"bw_ratio={bw_ratio:.3f}"]


@dataclass
class DiagnosisReport:
    """Outcome of :func:`classify` for one channel."""

    verdict: str
    channel: str
    window: Window
    n_samples: int
    kurtosis: float
    kurtosis_ci: KurtosisInterval
    peak_snr: float
    spike: Optional[SpikeMetrics]
    thresholds: DiagnosisConfig
    notes: List[str] = field(default_factory=list)
    ranking: Optional["SourceRanking"] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": DIAGNOSIS_SCHEMA_VERSION,
            "verdict": self.verdict,
            "channel": self.channel,
            "window": list(self.window),
            "n_samples": self.n_samples,
            "kurtosis": {"value": self.kurtosis, "ci": self.kurtosis_ci.to_dict()},
            "peak_snr": self.peak_snr,
            "spike": self.spike.to_dict() if self.spike is not None else None,
            "thresholds": self.thresholds.to_dict(),
            "notes": list(self.notes),
            "ranking": self.ranking.to_dict() if self.ranking is not None else None,
        }


def _segment_len(series: TimeSeries, cfg: DiagnosisConfig) -> int:
    if cfg.psd_segment_s is None:
        return max(1, int(DEFAULT_SEGMENT_FRACTION * len(series)))
    return int(round(cfg.psd_segment_s / series.dt))


def _has_shoulders(spectrum: SpectrumEstimate, spike: SpikeMetrics, cfg: DiagnosisConfig) -> bool:
    idx = int(np.argmin(np.abs(spectrum.freqs - spike.peak_freq)))
    lo = max(1, idx - SHOULDER_BINS)
    hi = min(len(spectrum) - 1, idx + SHOULDER_BINS)
    shoulder = min(spectrum.psd[lo], spectrum.psd[hi])
    return shoulder > 0 and 10.0 * math.log10(shoulder / spike.noise_floor) >= cfg.peak_snr_min


def classify(series: TimeSeries, cfg: DiagnosisConfig) -> DiagnosisReport:
    """Diagnose the oscillation mechanism of ``series`` over ``cfg.window``."""

    segment = series.window(cfg.window)
    if len(segment) < MIN_CLASSIFY_SAMPLES:
        raise InsufficientDataError(
            f"Analysis window holds {len(segment)} samples; at least {MIN_CLASSIFY_SAMPLES} are required",
            detail={"samples": len(segment), "required": MIN_CLASSIFY_SAMPLES},
        )
    kurt = excess_kurtosis(segment)
    interval = bootstrap_kurtosis_ci(segment, cfg.bootstrap_reps, cfg.ci_level, seed=cfg.seed)
    spectrum = welch_psd(segment, _segment_len(segment, cfg), cfg.psd_overlap, cfg.taper)
    spike = spike_metrics(spectrum, cfg.peak_snr_min)
    verdict, notes = decide(kurt, (interval.lower, interval.upper), spike.peak_snr, spike.bw_ratio, cfg)
    if verdict == VERDICT_FORCED and _has_shoulders(spectrum, spike, cfg):
        notes.append("spike_on_broadband_peak")
    notes.append(f"peak_freq={spike.peak_freq:.6g}")
    logger.info(
        "%s: verdict=%s kurtosis=%.3f ci=[%.3f, %.3f] peak=%.4g Hz snr=%.1f dB bw_ratio=%.2f",
        segment.label,
        verdict,
        kurt,
        interval.lower,
        interval.upper,
        spike.peak_freq,
        spike.peak_snr,
        spike.bw_ratio,
    )
    return DiagnosisReport(
        verdict=verdict,
        channel=segment.label,
        window=(segment.t0, segment.end_time),
        n_samples=len(segment),
        kurtosis=kurt,
        kurtosis_ci=interval,
        peak_snr=spike.peak_snr,
        spike=None if verdict == VERDICT_WEAKLY_DAMPED else spike,
        thresholds=cfg,
        notes=notes,
    )
