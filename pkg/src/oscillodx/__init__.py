"""oscillodx: diagnose sustained-oscillation mechanisms from statistical signatures."""

__version__ = "0.1.0"

from .classifier import DiagnosisConfig, DiagnosisReport, classify
from .localize import SourceRanking, rank_sources
from .models import ForcedParams, HopfParams, OuParams, WeaklyDampedParams, simulate
from .montecarlo import monte_carlo_kurtosis
from .series import MultiChannelRecord, TimeSeries

__all__ = [
    "__version__",
    "DiagnosisConfig",
    "DiagnosisReport",
    "ForcedParams",
    "HopfParams",
    "MultiChannelRecord",
    "OuParams",
    "SourceRanking",
    "TimeSeries",
    "WeaklyDampedParams",
    "classify",
    "monte_carlo_kurtosis",
    "rank_sources",
    "simulate",
]
