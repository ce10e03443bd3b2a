"""Measurement noise streams and SNR reporting."""
from __future__ import annotations

import numpy as np
import pytest

from oscillodx.errors import InvalidParamsError
from oscillodx.noise import NoiseSpec, add_measurement_noise, snr_db
from oscillodx.series import MultiChannelRecord, TimeSeries


def quiet_record(labels=("a", "b"), n: int = 20000) -> MultiChannelRecord:
    return MultiChannelRecord.from_series([TimeSeries(label=label, dt=0.1, samples=np.zeros(n)) for label in labels])


def test_zero_std_is_identity() -> None:
    record = quiet_record()
    assert add_measurement_noise(record, NoiseSpec(std=0.0, seed=3)) is record


def test_noise_level_and_channel_independence() -> None:
    noisy = add_measurement_noise(quiet_record(), NoiseSpec(std=1e-3, seed=1))
    a, b = noisy["a"].samples, noisy["b"].samples
    assert a.std() == pytest.approx(1e-3, rel=0.03)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.03
    assert noisy.labels == ["a", "b"]


def test_noise_is_seeded_and_prefix_stable() -> None:
    spec = NoiseSpec(std=0.5, seed=9)
    two = add_measurement_noise(quiet_record(("a", "b")), spec)
    three = add_measurement_noise(quiet_record(("a", "b", "c")), spec)
    assert np.array_equal(two["a"].samples, three["a"].samples)
    assert np.array_equal(two["b"].samples, three["b"].samples)
    other = add_measurement_noise(quiet_record(("a", "b")), NoiseSpec(std=0.5, seed=10))
    assert not np.array_equal(two["a"].samples, other["a"].samples)


@pytest.mark.parametrize("kwargs", [{"std": -1.0}, {"std": float("nan")}, {"std": 0.1, "seed": -1}, {"std": 0.1, "seed": 1.5}])
def test_invalid_noise_spec(kwargs) -> None:
    with pytest.raises(InvalidParamsError):
        NoiseSpec(**kwargs)


def test_snr_of_small_sinusoids() -> None:
    assert snr_db(5e-4, 1e-6) == pytest.approx(-9.03, abs=0.01)
    assert snr_db(2e-4, 1e-6) == pytest.approx(-16.99, abs=0.01)
    assert snr_db(1.0, 0.5) == pytest.approx(0.0)


@pytest.mark.parametrize("amplitude, variance", [(0.0, 1.0), (1.0, 0.0), (float("inf"), 1.0)])
def test_snr_rejects_degenerate_inputs(amplitude: float, variance: float) -> None:
    with pytest.raises(InvalidParamsError):
        snr_db(amplitude, variance)
