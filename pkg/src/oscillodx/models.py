"""Stochastic normal forms of the three sustained-oscillation mechanisms.

Each mechanism is a planar SDE in ``z = x + iy`` driven by independent
white noise of intensity ``sigma`` on both coordinates:

* weakly damped mode:  dz = (-gamma + i w0) z dt + sigma dW
* stochastic Hopf:     dz = ((gamma + i wh) z - |z|^2 z) dt + sigma dW
* forced mode:         dz = ((-gamma + i w0) z + F e^{i W t}) dt + sigma dW

plus the diagonal Ornstein–Uhlenbeck process used as the load/noise model.

The rotation-and-decay part ``(-gamma + i w) z`` of every planar model is
stepped with its exact propagator, so the step size does not shift the
damping, the cycle radius or the forced response; noise enters with the
Euler–Maruyama increment ``sigma sqrt(dt)``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov, solve_discrete_lyapunov
from scipy.signal import lfilter

from .constants import MODEL_FORCED, MODEL_LIMIT_CYCLE, MODEL_WEAKLY_DAMPED, RESOLUTION_WARN_DT_OMEGA
from .errors import InvalidParamsError, ResolutionWarning, StabilityError
from .logging_utils import get_logger
from .sde import SimConfig, integrate_linear, integrate_nonlinear, replicate_rng
from .series import TimeSeries

logger = get_logger(__name__)

InitialState = Tuple[float, float]


def _require_finite(owner: str, **values: float) -> None:
    for name, value in values.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidParamsError(f"{owner}.{name} must be a finite number, got {value!r}")


def _require_positive(owner: str, **values: float) -> None:
    for name, value in values.items():
        if value <= 0:
            raise InvalidParamsError(f"{owner}.{name} must be > 0, got {value}")


def _require_non_negative(owner: str, **values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise InvalidParamsError(f"{owner}.{name} must be >= 0, got {value}")


@dataclass(frozen=True)
class OuParams:
    """Diagonal OU process ``du = -C u dt + sigma dW`` with ``C = diag(decay_rates)``."""

    decay_rates: Tuple[float, ...]
    noise_intensity: float

    def __post_init__(self) -> None:
        rates = tuple(np.atleast_1d(self.decay_rates).tolist())
        if not rates:
            raise InvalidParamsError("OuParams.decay_rates must not be empty")
        for i, rate in enumerate(rates):
            _require_finite("OuParams", **{f"decay_rates[{i}]": rate})
            _require_positive("OuParams", **{f"decay_rates[{i}]": rate})
        _require_finite("OuParams", noise_intensity=self.noise_intensity)
        _require_non_negative("OuParams", noise_intensity=self.noise_intensity)
        object.__setattr__(self, "decay_rates", rates)

    def to_dict(self) -> Dict[str, object]:
        return {"decay_rates": list(self.decay_rates), "noise_intensity": self.noise_intensity}


@dataclass(frozen=True)
class WeaklyDampedParams:
    """Least-stable linear mode: damping ``gamma`` and natural frequency ``w0`` (rad/s)."""

    damping: float
    natural_freq: float
    noise_intensity: float

    def __post_init__(self) -> None:
        _require_finite("WeaklyDampedParams", damping=self.damping, natural_freq=self.natural_freq, noise_intensity=self.noise_intensity)
        _require_positive("WeaklyDampedParams", damping=self.damping, natural_freq=self.natural_freq)
        _require_non_negative("WeaklyDampedParams", noise_intensity=self.noise_intensity)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class HopfParams:
    """Supercritical Hopf normal form past the bifurcation by ``growth``.

    The deterministic limit-cycle radius is ``sqrt(growth)``.
    """

    growth: float
    hopf_freq: float
    noise_intensity: float

    def __post_init__(self) -> None:
        _require_finite("HopfParams", growth=self.growth, hopf_freq=self.hopf_freq, noise_intensity=self.noise_intensity)
        _require_positive("HopfParams", growth=self.growth, hopf_freq=self.hopf_freq)
        _require_non_negative("HopfParams", noise_intensity=self.noise_intensity)

    @property
    def cycle_radius(self) -> float:
        return math.sqrt(self.growth)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ForcedParams:
    """Damped linear mode driven by a rotating force ``F e^{i W t}``."""

    damping: float
    natural_freq: float
    force_amplitude: float
    force_freq: float
    noise_intensity: float

    def __post_init__(self) -> None:
        _require_finite(
            "ForcedParams",
            damping=self.damping,
            natural_freq=self.natural_freq,
            force_amplitude=self.force_amplitude,
            force_freq=self.force_freq,
            noise_intensity=self.noise_intensity,
        )
        _require_positive("ForcedParams", damping=self.damping, force_freq=self.force_freq)
        _require_non_negative("ForcedParams", force_amplitude=self.force_amplitude, noise_intensity=self.noise_intensity)

    @property
    def unforced(self) -> WeaklyDampedParams:
        return WeaklyDampedParams(damping=self.damping, natural_freq=self.natural_freq, noise_intensity=self.noise_intensity)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


ModelParams = Union[WeaklyDampedParams, HopfParams, ForcedParams]

MODEL_TYPES: Dict[str, type] = {
    MODEL_WEAKLY_DAMPED: WeaklyDampedParams,
    MODEL_LIMIT_CYCLE: HopfParams,
    MODEL_FORCED: ForcedParams,
}


def model_key(params: ModelParams) -> str:
    for key, kind in MODEL_TYPES.items():
        if isinstance(params, kind):
            return key
    raise InvalidParamsError(f"Unsupported model parameters: {type(params).__name__}")


def _check_step(coef: complex, dt: float, omega: float, owner: str) -> None:
    """Reject unstable explicit steps and warn about undersampled periods."""

    amplification = abs(1.0 + coef * dt)
    if amplification >= 1.0:
        raise StabilityError(
            f"{owner}: step dt={dt} is unstable for the explicit scheme (|1 + lambda dt| = {amplification:.6f} >= 1)",
            hint="Reduce dt.",
            detail={"dt": dt, "amplification": amplification},
        )
    _check_resolution(dt, omega, owner)


def _check_resolution(dt: float, omega: float, owner: str) -> None:
    if dt * abs(omega) >= RESOLUTION_WARN_DT_OMEGA:
        message = f"{owner}: dt*omega = {dt * abs(omega):.3f} undersamples the oscillation period"
        logger.warning(message)
        warnings.warn(message, ResolutionWarning, stacklevel=4)


def _rngs(cfg: SimConfig, replicates: Sequence[int]) -> List[np.random.Generator]:
    return [replicate_rng(cfg.seed, r) for r in replicates]


def _planar_series(paths: np.ndarray, cfg: SimConfig) -> Tuple[TimeSeries, TimeSeries]:
    row = paths[0]
    return (
        TimeSeries(label="x", dt=cfg.sample_dt, samples=row.real, t0=cfg.record_start),
        TimeSeries(label="y", dt=cfg.sample_dt, samples=row.imag, t0=cfg.record_start),
    )


def _initial(initial_state: Optional[InitialState], default: complex, n: int) -> np.ndarray:
    if initial_state is None:
        z0 = default
    else:
        x0, y0 = initial_state
        _require_finite("initial_state", x=x0, y=y0)
        z0 = complex(x0, y0)
    return np.full(n, z0, dtype=complex)


def simulate_ou(params: OuParams, cfg: SimConfig, initial_state: Optional[Sequence[float]] = None) -> List[TimeSeries]:
    """Simulate ``du = -C u dt + sigma dW``; one series per dimension (``u1``, ``u2``, ...)."""

    for rate in params.decay_rates:
        if cfg.dt * rate >= 2.0:
            raise StabilityError(
                f"OU step dt={cfg.dt} is unstable for decay rate {rate} (dt*rate >= 2)",
                hint="Reduce dt.",
                detail={"dt": cfg.dt, "decay_rate": rate},
            )
    dims = len(params.decay_rates)
    start = np.zeros(dims) if initial_state is None else np.asarray(initial_state, dtype=float)
    if start.shape != (dims,) or not np.all(np.isfinite(start)):
        raise InvalidParamsError(f"initial_state must hold {dims} finite values")
    result: List[TimeSeries] = []
    for i, rate in enumerate(params.decay_rates):
        # dimension i of run 0 draws from its own Philox stream
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(0, i))))
        path = integrate_linear(-float(rate), start[i : i + 1], params.noise_intensity, cfg, [rng])
        result.append(TimeSeries(label=f"u{i + 1}", dt=cfg.sample_dt, samples=path[0], t0=cfg.record_start))
    return result


def simulate_ensemble(
    params: ModelParams,
    cfg: SimConfig,
    replicates: Sequence[int],
    initial_state: Optional[InitialState] = None,
) -> np.ndarray:
    """Simulate several replicates at once.

    Row ``r`` equals the path a single run with replicate index
    ``replicates[r]`` produces, so ensembles can be split across workers.

    Returns
    -------
    np.ndarray
        Complex recorded states ``x + iy``, shape ``(len(replicates), cfg.n_samples)``.
    """

    replicates = list(replicates)
    rngs = _rngs(cfg, replicates)
    n = len(replicates)
    if isinstance(params, HopfParams):
        gamma, omega = params.growth, params.hopf_freq
        # rotation and growth are exact; the explicit cubic step relaxes the radius at rate -2 gamma
        _check_step(complex(-2.0 * gamma, 0.0), cfg.dt, omega, "limit cycle")
        z0 = _initial(initial_state, complex(params.cycle_radius, 0.0), n)

        def drift(z: np.ndarray, _t: float) -> np.ndarray:
            return -(z.real * z.real + z.imag * z.imag) * z

        return integrate_nonlinear(drift, z0, params.noise_intensity, cfg, rngs, linear=complex(gamma, omega))

    if isinstance(params, ForcedParams):
        coef = complex(-params.damping, params.natural_freq)
        _check_resolution(cfg.dt, max(params.natural_freq, params.force_freq), "forced")
        z0 = _initial(initial_state, 0j, n)
        # F e^{iWt} integrated exactly over one step of the linear propagator
        spin = 1j * params.force_freq
        gain = params.force_amplitude * (cmath.exp(spin * cfg.dt) - cmath.exp(coef * cfg.dt)) / (spin - coef)

        def forcing(t: np.ndarray) -> np.ndarray:
            return gain * np.exp(spin * t)

        return integrate_linear(coef, z0, params.noise_intensity, cfg, rngs, forcing=forcing, exponential=True)

    if isinstance(params, WeaklyDampedParams):
        coef = complex(-params.damping, params.natural_freq)
        _check_resolution(cfg.dt, params.natural_freq, "weakly damped")
        z0 = _initial(initial_state, 0j, n)
        return integrate_linear(coef, z0, params.noise_intensity, cfg, rngs, exponential=True)

    raise InvalidParamsError(f"Unsupported model parameters: {type(params).__name__}")


def simulate_weakly_damped(
    params: WeaklyDampedParams, cfg: SimConfig, initial_state: Optional[InitialState] = None
) -> Tuple[TimeSeries, TimeSeries]:
    """Sample path of the noise-driven weakly damped mode (starts at the origin)."""

    return _planar_series(simulate_ensemble(params, cfg, [0], initial_state), cfg)


def simulate_limit_cycle(
    params: HopfParams, cfg: SimConfig, initial_state: Optional[InitialState] = None
) -> Tuple[TimeSeries, TimeSeries]:
    """Sample path of the stochastic Hopf normal form (starts at ``(sqrt(gamma), 0)``)."""

    return _planar_series(simulate_ensemble(params, cfg, [0], initial_state), cfg)


def simulate_forced(
    params: ForcedParams, cfg: SimConfig, initial_state: Optional[InitialState] = None
) -> Tuple[TimeSeries, TimeSeries]:
    """Sample path of the forced mode.

    With ``force_amplitude == 0`` the path equals :func:`simulate_weakly_damped`
    for the same damping, frequency, noise and seed.
    """

    return _planar_series(simulate_ensemble(params, cfg, [0], initial_state), cfg)


def simulate(params: ModelParams, cfg: SimConfig, initial_state: Optional[InitialState] = None) -> Tuple[TimeSeries, TimeSeries]:
    """Dispatch to the simulator matching ``params``."""

    model_key(params)
    return _planar_series(simulate_ensemble(params, cfg, [0], initial_state), cfg)


def forced_response_amplitude(params: ForcedParams) -> float:
    """Amplitude of the deterministic stationary response of the forced mode.

    In the frame rotating at the forcing frequency the response is constant,
    giving ``rho = F / sqrt(gamma^2 + (w0 - W)^2)``.
    """

    return params.force_amplitude / math.hypot(params.damping, params.natural_freq - params.force_freq)


def _drift_matrix(params: Union[WeaklyDampedParams, ForcedParams]) -> np.ndarray:
    g, w = params.damping, params.natural_freq
    return np.array([[-g, -w], [w, -g]])


def stationary_covariance(
    params: Union[OuParams, WeaklyDampedParams, ForcedParams], dt: Optional[float] = None
) -> np.ndarray:
    """Stationary covariance of the linear (noise) part of a model.

    With ``dt=None`` this solves ``A P + P A^T + sigma^2 I = 0``. With a step
    size it returns the stationary covariance of the simulated recursion
    ``P = Phi P Phi^T + sigma^2 dt I``, where ``Phi = expm(A dt)`` for the
    planar modes and ``Phi = I + A dt`` for the OU load model.
    For the forced model only the fluctuation ``x1`` is covered.
    """

    if isinstance(params, OuParams):
        a = -np.diag(params.decay_rates)
    elif isinstance(params, (WeaklyDampedParams, ForcedParams)):
        a = _drift_matrix(params)
    else:
        raise InvalidParamsError(f"No linear covariance for {type(params).__name__}")
    q = params.noise_intensity**2 * np.eye(a.shape[0])
    if dt is None:
        return solve_continuous_lyapunov(a, -q)
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidParamsError(f"dt must be > 0, got {dt}")
    phi = np.eye(a.shape[0]) + a * dt if isinstance(params, OuParams) else expm(a * dt)
    return solve_discrete_lyapunov(phi, q * dt)


def _ar1(rng: np.random.Generator, n: int, decay: float, variance: float, dt: float) -> np.ndarray:
    """Exactly discretised stationary OU sequence with the given variance."""

    a = math.exp(-decay * dt)
    innovations = math.sqrt(variance * (1.0 - a * a)) * rng.standard_normal(n)
    first = math.sqrt(variance) * rng.standard_normal()
    out, _ = lfilter([1.0], [1.0, -a], innovations, zi=[a * first])
    return out


def synthesize_limit_cycle_signature(
    radius_sq: float,
    amp_variance: float,
    amp_decay: float,
    phase_diff: float,
    hopf_freq: float,
    n: int,
    dt: float = 0.1,
    seed: int = 0,
) -> TimeSeries:
    """Build ``(sqrt(gamma) + p) cos(phi)`` from independent components.

    ``p`` is a stationary OU with decay ``amp_decay`` and variance
    ``amp_variance``; ``phi`` is a Brownian motion with drift ``hopf_freq``
    and diffusion rate ``phase_diff``. This is the amplitude/phase
    decomposition behind the closed-form limit-cycle kurtosis.
    """

    _require_finite("limit_cycle_signature", radius_sq=radius_sq, amp_variance=amp_variance, amp_decay=amp_decay, phase_diff=phase_diff, hopf_freq=hopf_freq)
    _require_non_negative("limit_cycle_signature", radius_sq=radius_sq, amp_variance=amp_variance, phase_diff=phase_diff)
    _require_positive("limit_cycle_signature", amp_decay=amp_decay, n=n, dt=dt)
    amp_rng, phase_rng = (np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(2))
    p = _ar1(amp_rng, n, amp_decay, amp_variance, dt)
    phase_steps = hopf_freq * dt + math.sqrt(phase_diff * dt) * phase_rng.standard_normal(n)
    phi = phase_rng.uniform(0.0, 2.0 * math.pi) + np.cumsum(phase_steps)
    return TimeSeries(label="x", dt=dt, samples=(math.sqrt(radius_sq) + p) * np.cos(phi))


def synthesize_forced_signature(
    response_amp: float,
    fluct_variance: float,
    force_freq: float,
    fluct_decay: float,
    n: int,
    dt: float = 0.1,
    seed: int = 0,
) -> TimeSeries:
    """Build ``rho cos(W t) + x1`` with ``x1`` a stationary Gaussian OU."""

    _require_finite("forced_signature", response_amp=response_amp, fluct_variance=fluct_variance, force_freq=force_freq, fluct_decay=fluct_decay)
    _require_non_negative("forced_signature", response_amp=response_amp, fluct_variance=fluct_variance)
    _require_positive("forced_signature", fluct_decay=fluct_decay, n=n, dt=dt)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    t = dt * np.arange(n)
    x1 = _ar1(rng, n, fluct_decay, fluct_variance, dt)
    return TimeSeries(label="x", dt=dt, samples=response_amp * np.cos(force_freq * t) + x1)


def params_from_mapping(key: str, values: Dict[str, float]) -> ModelParams:
    """Construct model parameters from a config mapping."""

    try:
        kind = MODEL_TYPES[key]
    except KeyError as exc:
        raise InvalidParamsError(f"Unknown model {key!r}; expected one of {sorted(MODEL_TYPES)}") from exc
    try:
        return kind(**{k: float(v) for k, v in values.items()})
    except TypeError as exc:
        raise InvalidParamsError(f"Bad parameters for model {key!r}: {exc}") from exc
