"""Constants and file conventions for oscillodx."""
from __future__ import annotations

import math

PACKAGE_NAME = "oscillodx"

DIAGNOSIS_SCHEMA_VERSION = "diagnosis.v1"
RUN_MANIFEST_SCHEMA_VERSION = "run_manifest.v1"
MANIFEST_SUFFIX = ".manifest.json"

# Verdicts of the diagnosis flowchart
VERDICT_WEAKLY_DAMPED = "weakly_damped"
VERDICT_LIMIT_CYCLE = "limit_cycle"
VERDICT_FORCED = "forced"
VERDICT_NO_OSCILLATION = "no_oscillation"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICTS = (
    VERDICT_WEAKLY_DAMPED,
    VERDICT_LIMIT_CYCLE,
    VERDICT_FORCED,
    VERDICT_NO_OSCILLATION,
    VERDICT_INCONCLUSIVE,
)

# CLI model keys
MODEL_WEAKLY_DAMPED = "wd"
MODEL_LIMIT_CYCLE = "lc"
MODEL_FORCED = "forced"
MODEL_KEYS = (MODEL_WEAKLY_DAMPED, MODEL_LIMIT_CYCLE, MODEL_FORCED)

# Estimator limits
MIN_KURTOSIS_SAMPLES = 100
MIN_CLASSIFY_SAMPLES = 1000
MIN_BOOTSTRAP_SAMPLES = 1000
MIN_BOOTSTRAP_REPS = 100
MIN_SEGMENT_LEN = 32
MIN_SPECTRUM_BINS = 64
MIN_MONTE_CARLO_RUNS = 30

# Lower bound of excess kurtosis for any distribution
KURTOSIS_FLOOR = -2.0
# Excess kurtosis of a pure sinusoid
SINUSOID_KURTOSIS = -1.5
SIGN_CHANGE_RATIO = 1.0 + math.sqrt(2.0)

# Relative timebase jitter tolerated when reading CSV files
TIMEBASE_JITTER_TOL = 1e-6
# dt * omega above which the oscillation period is considered undersampled
RESOLUTION_WARN_DT_OMEGA = 0.5
# Channel variance spread above which a ranking is flagged
VARIANCE_DISPARITY_RATIO = 10.0

# Number of integrator steps drawn per noise chunk
NOISE_CHUNK_STEPS = 8192
