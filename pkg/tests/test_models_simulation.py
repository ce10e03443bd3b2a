"""Sample paths of the three mechanisms and the OU load model."""
from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from oscillodx.errors import InvalidParamsError, ResolutionWarning, StabilityError
from oscillodx.models import (
    ForcedParams,
    HopfParams,
    OuParams,
    WeaklyDampedParams,
    forced_response_amplitude,
    params_from_mapping,
    simulate,
    simulate_ensemble,
    simulate_forced,
    simulate_limit_cycle,
    simulate_ou,
    simulate_weakly_damped,
    stationary_covariance,
)
from oscillodx.sde import SimConfig
from oscillodx.stats import excess_kurtosis

WD = WeaklyDampedParams(damping=0.1, natural_freq=1.0, noise_intensity=0.1)


def short_cfg(record: float = 100.0, **kwargs) -> SimConfig:
    base = {"dt": 0.01, "burn_in": 20.0, "seed": 0, "output_stride": 10}
    base.update(kwargs)
    return SimConfig.for_record(record, **base)


def test_recorded_time_axis() -> None:
    cfg = short_cfg(record=50.0)
    x, y = simulate_weakly_damped(WD, cfg)
    assert x.label == "x" and y.label == "y"
    assert len(x) == len(y) == cfg.n_samples == 500
    assert x.dt == pytest.approx(0.1)
    assert x.t0 == pytest.approx(20.0)


def test_same_seed_same_path_and_different_seed_differs() -> None:
    a, _ = simulate_weakly_damped(WD, short_cfg())
    b, _ = simulate_weakly_damped(WD, short_cfg())
    c, _ = simulate_weakly_damped(WD, short_cfg(seed=1))
    assert np.array_equal(a.samples, b.samples)
    assert not np.allclose(a.samples, c.samples)


def test_ensemble_rows_match_single_runs() -> None:
    cfg = short_cfg(record=30.0)
    for params in (WD, HopfParams(growth=0.05, hopf_freq=1.0, noise_intensity=0.05)):
        paths = simulate_ensemble(params, cfg, [0, 1, 2])
        alone = simulate_ensemble(params, cfg, [2])
        np.testing.assert_allclose(paths[2], alone[0], rtol=1e-12, atol=1e-15)
        assert not np.allclose(paths[0], paths[1])


def test_unforced_forced_mode_equals_weakly_damped() -> None:
    cfg = short_cfg()
    forced = ForcedParams(damping=0.1, natural_freq=1.0, force_amplitude=0.0, force_freq=0.8, noise_intensity=0.1)
    fx, fy = simulate_forced(forced, cfg)
    wx, wy = simulate_weakly_damped(forced.unforced, cfg)
    np.testing.assert_array_equal(fx.samples, wx.samples)
    np.testing.assert_array_equal(fy.samples, wy.samples)


def test_weakly_damped_variance_matches_discrete_lyapunov() -> None:
    cfg = SimConfig.for_record(2000.0, dt=0.01, burn_in=50.0, seed=5, output_stride=10)
    paths = simulate_ensemble(WD, cfg, range(20))
    observed = 0.5 * (paths.real.var() + paths.imag.var())
    expected = stationary_covariance(WD, dt=cfg.dt)[0, 0]
    assert observed == pytest.approx(expected, rel=0.1)


def test_stationary_covariance_continuous_limit() -> None:
    continuous = stationary_covariance(WD)
    np.testing.assert_allclose(continuous, WD.noise_intensity**2 / (2 * WD.damping) * np.eye(2), rtol=1e-10)
    np.testing.assert_allclose(stationary_covariance(WD, dt=1e-4), continuous, rtol=1e-3)


def test_noiseless_weakly_damped_is_exponential_decay() -> None:
    params = WeaklyDampedParams(damping=0.2, natural_freq=1.0, noise_intensity=0.0)
    cfg = SimConfig(dt=0.01, duration=10.0, burn_in=0.0, output_stride=1)
    x, y = simulate_weakly_damped(params, cfg, initial_state=(1.0, 0.0))
    t = cfg.dt * np.arange(cfg.n_samples)
    np.testing.assert_allclose(x.samples, np.exp(-0.2 * t) * np.cos(t), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(y.samples, np.exp(-0.2 * t) * np.sin(t), rtol=1e-9, atol=1e-12)


def test_noiseless_hopf_settles_on_discrete_cycle() -> None:
    params = HopfParams(growth=1.0, hopf_freq=1.0, noise_intensity=0.0)
    cfg = SimConfig(dt=0.01, duration=30.0, burn_in=20.0, output_stride=1)
    x, y = simulate_limit_cycle(params, cfg)
    radius = np.hypot(x.samples, y.samples)
    # fixed point of |e^{gamma dt} e^{i w dt} - r^2 dt| = 1
    growth, turn = math.exp(params.growth * cfg.dt), params.hopf_freq * cfg.dt
    r2dt = growth * math.cos(turn) - math.sqrt(1.0 - (growth * math.sin(turn)) ** 2)
    np.testing.assert_allclose(radius, math.sqrt(r2dt / cfg.dt), rtol=1e-6)
    assert radius.mean() == pytest.approx(params.cycle_radius, rel=0.005)


def test_hopf_radius_is_not_inflated_by_the_rotation() -> None:
    params = HopfParams(growth=0.01, hopf_freq=0.3 * math.pi, noise_intensity=1e-4)
    cfg = SimConfig.for_record(2000.0, dt=0.01, burn_in=100.0, seed=3, output_stride=10)
    x, y = simulate_limit_cycle(params, cfg)
    radius = np.hypot(x.samples, y.samples)
    assert radius.mean() == pytest.approx(params.cycle_radius, rel=0.02)


def test_hopf_kurtosis_tends_to_pure_sinusoid_as_noise_vanishes() -> None:
    params = HopfParams(growth=0.01, hopf_freq=0.3 * math.pi, noise_intensity=1e-4)
    cfg = SimConfig.for_record(2000.0, dt=0.01, burn_in=100.0, seed=4, output_stride=10)
    x, _ = simulate_limit_cycle(params, cfg)
    assert excess_kurtosis(x) == pytest.approx(-1.5, abs=0.05)


def test_hopf_divergence_raises_stability_error() -> None:
    params = HopfParams(growth=1.0, hopf_freq=1.0, noise_intensity=0.0)
    cfg = SimConfig(dt=0.5, duration=20.0, burn_in=0.0, output_stride=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        with pytest.raises(StabilityError) as info:
            simulate_limit_cycle(params, cfg, initial_state=(10.0, 0.0))
    assert info.value.exit_code == 21
    assert info.value.detail["dt"] == 0.5


def test_halving_the_step_keeps_the_stationary_variance() -> None:
    expected = stationary_covariance(WD)[0, 0]
    for dt in (0.02, 0.01):
        assert abs(stationary_covariance(WD, dt=dt)[0, 0] - expected) < 0.01 * expected

    params = HopfParams(growth=0.05, hopf_freq=1.0, noise_intensity=0.02)
    moments = []
    for dt, stride in ((0.02, 5), (0.01, 10)):
        cfg = SimConfig.for_record(1000.0, dt=dt, burn_in=50.0, seed=6, output_stride=stride)
        per_run = np.abs(simulate_ensemble(params, cfg, range(16))) ** 2
        means = per_run.mean(axis=1)
        moments.append((means.mean(), means.std(ddof=1) / math.sqrt(means.size)))
    (coarse, coarse_se), (fine, fine_se) = moments
    assert abs(coarse - fine) < 3.0 * math.hypot(coarse_se, fine_se)


def test_noiseless_forced_response_amplitude() -> None:
    params = ForcedParams(damping=1.0, natural_freq=0.5, force_amplitude=0.2, force_freq=0.9, noise_intensity=0.0)
    cfg = SimConfig(dt=0.01, duration=40.0, burn_in=30.0, output_stride=1)
    x, y = simulate_forced(params, cfg)
    amplitude = np.hypot(x.samples, y.samples)
    np.testing.assert_allclose(amplitude, forced_response_amplitude(params), rtol=1e-6)


def test_forced_response_amplitude_formula() -> None:
    params = ForcedParams(damping=0.3, natural_freq=1.0, force_amplitude=0.6, force_freq=1.4, noise_intensity=0.0)
    assert forced_response_amplitude(params) == pytest.approx(0.6 / 0.5)


def test_unstable_step_raises() -> None:
    with pytest.raises(StabilityError):
        simulate_limit_cycle(HopfParams(growth=200.0, hopf_freq=1.0, noise_intensity=0.0), short_cfg(record=1.0))


def test_coarse_linear_step_stays_stable() -> None:
    params = WeaklyDampedParams(damping=0.02, natural_freq=0.3 * math.pi, noise_intensity=0.0)
    cfg = SimConfig.for_record(100.0, dt=0.6, burn_in=0.0, output_stride=1)
    with pytest.warns(ResolutionWarning):
        x, y = simulate_weakly_damped(params, cfg, initial_state=(1.0, 0.0))
    np.testing.assert_allclose(np.hypot(x.samples, y.samples)[-1], math.exp(-0.02 * cfg.dt * (cfg.n_samples - 1)), rtol=1e-9)


def test_coarse_step_warns_about_resolution() -> None:
    params = WeaklyDampedParams(damping=5.0, natural_freq=6.0, noise_intensity=0.1)
    cfg = SimConfig.for_record(20.0, dt=0.1, burn_in=0.0, output_stride=1)
    with pytest.warns(ResolutionWarning):
        simulate_weakly_damped(params, cfg)


def test_fine_step_does_not_warn() -> None:
    with warnings.catch_warnings():
        warnings.simplefilter("error", ResolutionWarning)
        simulate(WD, short_cfg(record=10.0))


@pytest.mark.parametrize(
    "build",
    [
        lambda: WeaklyDampedParams(damping=-0.1, natural_freq=1.0, noise_intensity=0.1),
        lambda: WeaklyDampedParams(damping=0.1, natural_freq=float("nan"), noise_intensity=0.1),
        lambda: HopfParams(growth=0.0, hopf_freq=1.0, noise_intensity=0.1),
        lambda: HopfParams(growth=0.1, hopf_freq=1.0, noise_intensity=-1.0),
        lambda: ForcedParams(damping=0.1, natural_freq=1.0, force_amplitude=-0.1, force_freq=1.0, noise_intensity=0.1),
        lambda: OuParams(decay_rates=(), noise_intensity=0.1),
        lambda: OuParams(decay_rates=(1.0, 0.0), noise_intensity=0.1),
        lambda: SimConfig(dt=0.0),
        lambda: SimConfig(duration=10.0, burn_in=20.0),
        lambda: SimConfig(output_stride=0),
    ],
)
def test_invalid_parameters_raise(build) -> None:
    with pytest.raises(InvalidParamsError):
        build()


def test_params_from_mapping() -> None:
    params = params_from_mapping("lc", {"growth": 0.01, "hopf_freq": 1.0, "noise_intensity": 0.01})
    assert isinstance(params, HopfParams)
    assert params.cycle_radius == pytest.approx(0.1)
    with pytest.raises(InvalidParamsError):
        params_from_mapping("wd", {"damping": 0.1})


def test_ou_dimensions_and_variance() -> None:
    params = OuParams(decay_rates=(0.5, 2.0), noise_intensity=0.2)
    cfg = SimConfig.for_record(4000.0, dt=0.01, burn_in=20.0, seed=2, output_stride=10)
    channels = simulate_ou(params, cfg)
    assert [c.label for c in channels] == ["u1", "u2"]
    expected = np.diag(stationary_covariance(params, dt=cfg.dt))
    for series, var in zip(channels, expected):
        assert series.samples.var() == pytest.approx(var, rel=0.15)
    assert abs(np.corrcoef(channels[0].samples, channels[1].samples)[0, 1]) < 0.1


def test_ou_unstable_step() -> None:
    with pytest.raises(StabilityError):
        simulate_ou(OuParams(decay_rates=(50.0,), noise_intensity=0.1), SimConfig.for_record(1.0, dt=0.05, burn_in=0.0))
