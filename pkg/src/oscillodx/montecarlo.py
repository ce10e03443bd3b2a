"""Ensemble kurtosis statistics of the oscillation models."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import MIN_MONTE_CARLO_RUNS
from .errors import InvalidParamsError
from .logging_utils import get_logger, log_elapsed
from .models import ModelParams, model_key, simulate_ensemble
from .noise import measurement_rng
from .sde import SimConfig
from .stats import excess_kurtosis

logger = get_logger(__name__)

# replicates integrated together in one vectorised call
DEFAULT_BATCH = 20


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-run kurtosis of ``x`` with its histogram and empirical interval."""

    model: str
    values: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    lower: float
    upper: float
    ci_level: float

    @property
    def runs(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "runs": self.runs,
            "ci_level": self.ci_level,
            "interval": [self.lower, self.upper],
            "mean": float(self.values.mean()),
            "bin_edges": self.bin_edges.tolist(),
            "counts": self.counts.tolist(),
        }


def _kurtosis_batch(task: Tuple[ModelParams, SimConfig, Tuple[int, ...], float]) -> List[Tuple[int, float]]:
    params, cfg, replicates, noise_std = task
    paths = simulate_ensemble(params, cfg, replicates)
    out = []
    for run, row in zip(replicates, paths):
        x = row.real
        if noise_std > 0:
            x = x + noise_std * measurement_rng(cfg.seed, run).standard_normal(x.size)
        out.append((run, excess_kurtosis(x)))
    return out


def _batches(runs: int, batch: int) -> List[Tuple[int, ...]]:
    return [tuple(range(start, min(start + batch, runs))) for start in range(0, runs, batch)]


def monte_carlo_kurtosis(
    params: ModelParams,
    cfg: SimConfig,
    runs: int,
    ci_level: float = 0.90,
    bins: int = 20,
    workers: Optional[int] = None,
    batch: int = DEFAULT_BATCH,
    noise_std: float = 0.0,
) -> MonteCarloResult:
    """Excess kurtosis of ``x`` over ``runs`` independent sample paths.

    Run ``i`` uses the noise stream of ``(cfg.seed, i)``, so results do not
    depend on ``workers`` or ``batch``. With ``workers`` > 1 the batches are
    spread over a process pool and merged by run index. ``noise_std`` adds
    white measurement noise to each recorded ``x``.
    """
    if isinstance(runs, bool) or int(runs) != runs or runs < MIN_MONTE_CARLO_RUNS:
        raise InvalidParamsError(f"runs must be an integer >= {MIN_MONTE_CARLO_RUNS}, got {runs!r}")
    if not (0.0 < ci_level < 1.0):
        raise InvalidParamsError(f"ci_level must lie in (0, 1), got {ci_level}")
    if bins < 1 or batch < 1:
        raise InvalidParamsError("bins and batch must be >= 1")
    if not (noise_std >= 0):
        raise InvalidParamsError(f"noise_std must be >= 0, got {noise_std}")
    key = model_key(params)
    tasks = [(params, cfg, reps, float(noise_std)) for reps in _batches(int(runs), int(batch))]
    logger.info("monte carlo: model=%s runs=%d batches=%d workers=%s", key, runs, len(tasks), workers or 1)

    with log_elapsed(logger, f"monte carlo {key}", logging.INFO):
        if workers is None or workers <= 1:
            results = [_kurtosis_batch(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_kurtosis_batch, tasks))

    values = np.empty(int(runs))
    for chunk in results:
        for run, value in chunk:
            values[run] = value
    tail = (1.0 - ci_level) / 2.0
    lower, upper = np.quantile(values, [tail, 1.0 - tail])
    counts, edges = np.histogram(values, bins=bins)
    logger.info("monte carlo: %s %.0f%% interval [%.3f, %.3f]", key, 100 * ci_level, lower, upper)
    return MonteCarloResult(
        model=key,
        values=values,
        bin_edges=edges,
        counts=counts,
        lower=float(lower),
        upper=float(upper),
        ci_level=float(ci_level),
    )


def ensemble_intervals(
    settings: Sequence[ModelParams], cfg: SimConfig, runs: int, ci_level: float = 0.90, workers: Optional[int] = None
) -> Dict[str, MonteCarloResult]:
    """Monte Carlo kurtosis for several mechanisms under one simulation config."""

    return {model_key(p): monte_carlo_kurtosis(p, cfg, runs, ci_level, workers=workers) for p in settings}
