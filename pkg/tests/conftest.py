"""Pytest fixtures and helpers for oscillodx tests."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pytest
from typer.testing import CliRunner

from oscillodx.cli import app
from oscillodx.csv_io import write_csv
from oscillodx.series import MultiChannelRecord, TimeSeries


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gaussian_series(n: int = 20000, dt: float = 0.1, seed: int = 0, label: str = "x", std: float = 1.0) -> TimeSeries:
    """White Gaussian samples."""
    return TimeSeries(label=label, dt=dt, samples=std * rng_for(seed).standard_normal(n))


def sine_series(
    n: int = 20000,
    dt: float = 0.1,
    freq_hz: float = 0.15,
    amplitude: float = 1.0,
    noise_std: float = 0.0,
    seed: int = 0,
    label: str = "x",
) -> TimeSeries:
    """Sinusoid with optional white noise; the phase is drawn from ``seed``."""
    rng = rng_for(seed)
    t = dt * np.arange(n)
    samples = amplitude * np.cos(2.0 * math.pi * freq_hz * t + rng.uniform(0.0, 2.0 * math.pi))
    if noise_std > 0:
        samples = samples + noise_std * rng.standard_normal(n)
    return TimeSeries(label=label, dt=dt, samples=samples)


def ar1_series(n: int = 20000, dt: float = 0.1, decay: float = 0.5, seed: int = 0, label: str = "x") -> TimeSeries:
    """Unit-variance stationary AR(1) with correlation time ``1 / decay``."""
    a = math.exp(-decay * dt)
    rng = rng_for(seed)
    out = np.empty(n)
    out[0] = rng.standard_normal()
    shocks = math.sqrt(1.0 - a * a) * rng.standard_normal(n)
    for i in range(1, n):
        out[i] = a * out[i - 1] + shocks[i]
    return TimeSeries(label=label, dt=dt, samples=out)


def write_record_csv(
    tmp_path: Path,
    channels: Dict[str, np.ndarray],
    dt: float = 0.1,
    t0: float = 0.0,
    name: str = "record.csv",
) -> Path:
    """Write channels sharing one time base to ``tmp_path / name``."""
    series = [TimeSeries(label=label, dt=dt, samples=np.asarray(values, dtype=float), t0=t0) for label, values in channels.items()]
    return write_csv(MultiChannelRecord.from_series(series), tmp_path / name)


def invoke(args: list[str], runner: Optional[CliRunner] = None):
    """Run the CLI in-process and return the click result."""
    runner = runner or CliRunner()
    return runner.invoke(app, args, catch_exceptions=False)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()
