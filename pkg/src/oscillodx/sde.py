"""Fixed-step Euler–Maruyama engine for additive-noise planar SDEs.

All oscillator normal forms are integrated in complex form ``z = x + iy``
with independent Gaussian increments on both Cartesian coordinates. The
linear part ``c z`` of the drift is advanced by its exact propagator and
the rest by an explicit Euler step (exponential Euler–Maruyama)::

    z[k+1] = P z[k] + f(z[k], t[k]) * dt + sigma * sqrt(dt) * (xi_x + i xi_y)

with ``P = exp(c dt)``. Setting ``P = 1 + c dt`` recovers the plain
explicit scheme, which the scalar OU load model keeps.

Linear drifts run the recursion as a first-order IIR filter
(``scipy.signal.lfilter``); nonlinear drifts run an explicit step loop.
Both are vectorised over replicates and consume noise in fixed-size
chunks, so memory stays bounded for long records.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from .constants import NOISE_CHUNK_STEPS
from .errors import InvalidParamsError, StabilityError
from .logging_utils import get_logger

logger = get_logger(__name__)

Drift = Callable[[np.ndarray, float], np.ndarray]
Forcing = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SimConfig:
    """Integration and recording settings shared by every simulator.

    ``duration`` is the total simulated time including ``burn_in``; samples
    are recorded every ``output_stride`` steps once the burn-in has elapsed.
    """

    dt: float = 0.01
    duration: float = 600.0
    burn_in: float = 100.0
    seed: int = 0
    output_stride: int = 10

    def __post_init__(self) -> None:
        for name in ("dt", "duration", "burn_in"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParamsError(f"SimConfig.{name} must be finite, got {value!r}")
        if self.dt <= 0:
            raise InvalidParamsError(f"SimConfig.dt must be > 0, got {self.dt}")
        if self.burn_in < 0:
            raise InvalidParamsError(f"SimConfig.burn_in must be >= 0, got {self.burn_in}")
        if self.duration <= self.burn_in:
            raise InvalidParamsError(
                f"SimConfig.duration ({self.duration}) must exceed burn_in ({self.burn_in})"
            )
        if isinstance(self.output_stride, bool) or int(self.output_stride) != self.output_stride or self.output_stride < 1:
            raise InvalidParamsError(f"SimConfig.output_stride must be an integer >= 1, got {self.output_stride!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParamsError(f"SimConfig.seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "output_stride", int(self.output_stride))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def for_record(cls, record_s: float, **kwargs: object) -> "SimConfig":
        """Build a config whose recorded part lasts ``record_s`` seconds."""
        burn_in = float(kwargs.pop("burn_in", cls.burn_in))  # type: ignore[arg-type]
        return cls(duration=burn_in + float(record_s), burn_in=burn_in, **kwargs)  # type: ignore[arg-type]

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def burn_steps(self) -> int:
        return int(round(self.burn_in / self.dt))

    @property
    def n_samples(self) -> int:
        """Number of recorded samples."""
        return -(-(self.n_steps - self.burn_steps) // self.output_stride)

    @property
    def sample_dt(self) -> float:
        return self.dt * self.output_stride

    @property
    def record_start(self) -> float:
        return self.burn_steps * self.dt

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "duration": self.duration,
            "burn_in": self.burn_in,
            "seed": self.seed,
            "output_stride": self.output_stride,
        }


def replicate_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """Counter-based Philox stream for one ``(seed, replicate)`` pair."""

    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))))


def _noise_chunks(
    rngs: Sequence[np.random.Generator], n_steps: int, scale: float, complex_noise: bool
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(first_step, increments)`` with increments shaped (steps, replicates)."""

    for start in range(0, n_steps, NOISE_CHUNK_STEPS):
        size = min(NOISE_CHUNK_STEPS, n_steps - start)
        if complex_noise:
            draws = np.stack([rng.standard_normal((size, 2)) for rng in rngs], axis=1)
            chunk = scale * (draws[..., 0] + 1j * draws[..., 1])
        else:
            chunk = scale * np.stack([rng.standard_normal(size) for rng in rngs], axis=1)
        yield start, chunk


def _recorded_offsets(cfg: SimConfig, first_step: int, size: int) -> np.ndarray:
    """Offsets within a chunk of the states ``z[k]`` that are recorded."""

    steps = np.arange(first_step, first_step + size)
    keep = (steps >= cfg.burn_steps) & ((steps - cfg.burn_steps) % cfg.output_stride == 0)
    return np.nonzero(keep)[0]


def propagator(coef: complex | float, dt: float, exponential: bool) -> complex | float:
    """One-step factor of the linear drift ``coef z``: ``exp(coef dt)`` or ``1 + coef dt``."""

    if exponential:
        return cmath.exp(coef * dt) if isinstance(coef, complex) else math.exp(coef * dt)
    return 1.0 + coef * dt


def integrate_linear(
    coef: complex | float,
    z0: np.ndarray,
    noise_scale: float,
    cfg: SimConfig,
    rngs: Sequence[np.random.Generator],
    forcing: Optional[Forcing] = None,
    exponential: bool = False,
) -> np.ndarray:
    """Integrate ``dz = coef z dt + forcing + noise`` for each replicate.

    Parameters
    ----------
    coef:
        Drift coefficient; complex for planar oscillators, real for scalar OU.
    z0:
        Initial state per replicate, shape ``(replicates,)``.
    noise_scale:
        Noise intensity ``sigma``; increments are ``sigma * sqrt(dt) * N(0, 1)``.
    forcing:
        Optional deterministic contribution added to each step, evaluated
        on the step start times ``t[k]``.
    exponential:
        Advance ``coef z`` with ``exp(coef dt)`` instead of ``1 + coef dt``.

    Returns
    -------
    np.ndarray
        Recorded states, shape ``(replicates, cfg.n_samples)``.
    """

    complex_noise = isinstance(coef, complex)
    dtype = complex if complex_noise else float
    phi = propagator(coef, cfg.dt, exponential)
    state = np.asarray(z0, dtype=dtype).copy()
    out = np.empty((len(rngs), cfg.n_samples), dtype=dtype)
    filled = 0
    for start, increments in _noise_chunks(rngs, cfg.n_steps, noise_scale * math.sqrt(cfg.dt), complex_noise):
        size = increments.shape[0]
        if forcing is not None:
            times = cfg.dt * np.arange(start, start + size)
            increments = increments + forcing(times)[:, None]
        # lfilter solves s[n] = phi * s[n-1] + u[n]; with zi = phi * z[k0] this is z[k0+n+1]
        stepped, _ = lfilter([1.0], [1.0, -phi], increments, axis=0, zi=(phi * state)[None, :])
        states = np.concatenate([state[None, :], stepped[:-1]], axis=0)
        offsets = _recorded_offsets(cfg, start, size)
        out[:, filled : filled + offsets.size] = states[offsets].T
        filled += offsets.size
        state = stepped[-1]
    logger.debug("linear EM: %d steps, %d replicates, %d samples", cfg.n_steps, len(rngs), filled)
    return out


def integrate_nonlinear(
    drift: Drift,
    z0: np.ndarray,
    noise_scale: float,
    cfg: SimConfig,
    rngs: Sequence[np.random.Generator],
    linear: complex = 0j,
) -> np.ndarray:
    """Integrate ``dz = (linear z + drift(z, t)) dt + noise`` with a step loop.

    ``linear z`` is advanced by ``exp(linear dt)`` and ``drift`` by an
    explicit step. Returns recorded complex states, shape
    ``(replicates, cfg.n_samples)``.

    Raises
    ------
    StabilityError
        If a state stops being finite.
    """

    state = np.asarray(z0, dtype=complex).copy()
    out = np.empty((len(rngs), cfg.n_samples), dtype=complex)
    filled = 0
    dt = cfg.dt
    phi = cmath.exp(linear * dt)
    for start, increments in _noise_chunks(rngs, cfg.n_steps, noise_scale * math.sqrt(dt), True):
        size = increments.shape[0]
        states = np.empty_like(increments)
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(size):
                states[j] = state
                state = phi * state + drift(state, (start + j) * dt) * dt + increments[j]
        if not np.all(np.isfinite(state)):
            raise StabilityError(
                f"nonlinear EM diverged before t={(start + size) * dt:g} s with dt={dt}",
                hint="Reduce dt.",
                detail={"dt": dt, "step": start + size},
            )
        offsets = _recorded_offsets(cfg, start, size)
        out[:, filled : filled + offsets.size] = states[offsets].T
        filled += offsets.size
    logger.debug("nonlinear EM: %d steps, %d replicates, %d samples", cfg.n_steps, len(rngs), filled)
    return out
