"""Parameter resolution: defaults, user config and CLI flags.

Values are addressed by dotted keys (``simulation.dt``,
``models.lc.growth``, ``diagnosis.kurtosis_threshold``). Precedence is
cli > config > default, and every resolved key records its source.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .classifier import DiagnosisConfig
from .config import ConfigError, load_custom_config, load_default_config
from .errors import InvalidParamsError
from .models import ModelParams, params_from_mapping
from .noise import NoiseSpec
from .sde import SimConfig
from .series import Window

Flat = Dict[str, Any]


def flatten(config: Mapping[str, Any], prefix: str = "") -> Flat:
    flat: Flat = {}
    for key, value in config.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def load_default_params() -> Tuple[Flat, Dict[str, str]]:
    """Load params from the default configuration file."""

    params = flatten(load_default_config())
    return params, {key: "default" for key in params}


def load_config_params(config_path: Optional[Path | str]) -> Optional[Flat]:
    """Load params from a user-provided config path if present."""

    if config_path is None:
        return None
    path_obj = Path(config_path)
    if not path_obj.exists():
        raise ConfigError(f"Config path does not exist: {path_obj}")
    return flatten(load_custom_config(path_obj))


def merge_params(
    default_params: Flat,
    config_params: Optional[Flat],
    cli_overrides: Mapping[str, Any],
) -> Tuple[Flat, Dict[str, str]]:
    """Merge params with precedence cli > config > default, tracking sources.

    Keys unknown to the defaults are rejected so typos do not pass silently.
    """
    for origin, values in (("config", config_params or {}), ("cli", cli_overrides)):
        unknown = sorted(set(values) - set(default_params))
        if unknown:
            raise InvalidParamsError(f"Unknown {origin} parameter(s): {', '.join(unknown)}")

    merged: Flat = {}
    sources: Dict[str, str] = {}
    sentinel = object()
    for key, default in default_params.items():
        cli_value = cli_overrides.get(key, sentinel)
        if cli_value is not sentinel and cli_value is not None:
            value, source = cli_value, "cli"
        elif config_params is not None and config_params.get(key) is not None:
            value, source = config_params[key], "config"
        else:
            value, source = default, "default"
        merged[key] = value
        sources[key] = source
    return merged, sources


def resolve_params(config_path: Optional[Path | str], cli_overrides: Mapping[str, Any]) -> Tuple[Flat, Dict[str, str]]:
    defaults, _ = load_default_params()
    return merge_params(defaults, load_config_params(config_path), cli_overrides)


def _section(params: Flat, prefix: str) -> Dict[str, Any]:
    head = prefix + "."
    return {key[len(head) :]: value for key, value in params.items() if key.startswith(head)}


def sim_config(params: Flat) -> SimConfig:
    """``simulation.duration`` is the recorded length; burn-in comes on top."""

    sim = _section(params, "simulation")
    try:
        return SimConfig.for_record(
            float(sim["duration"]),
            dt=float(sim["dt"]),
            burn_in=float(sim["burn_in"]),
            seed=int(sim["seed"]),
            output_stride=int(sim["output_stride"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParamsError):
            raise
        raise InvalidParamsError(f"Bad simulation parameters: {exc}") from exc


def model_params(params: Flat, key: str) -> ModelParams:
    return params_from_mapping(key, _section(params, f"models.{key}"))


def diagnosis_config(params: Flat, window: Optional[Window] = None) -> DiagnosisConfig:
    diag = _section(params, "diagnosis")
    try:
        return DiagnosisConfig(
            kurtosis_threshold=float(diag["kurtosis_threshold"]),
            window=window,
            spike_bw_ratio_max=float(diag["spike_bw_ratio_max"]),
            peak_snr_min=float(diag["peak_snr_min"]),
            bootstrap_reps=int(diag["bootstrap_reps"]),
            ci_level=float(diag["ci_level"]),
            psd_segment_s=None if diag["psd_segment_s"] is None else float(diag["psd_segment_s"]),
            psd_overlap=float(diag["psd_overlap"]),
            taper=str(diag["taper"]),
            seed=int(diag["seed"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParamsError):
            raise
        raise InvalidParamsError(f"Bad diagnosis parameters: {exc}") from exc


def noise_spec(params: Flat, seed: int) -> NoiseSpec:
    try:
        return NoiseSpec(std=float(params["noise.std"]), seed=seed)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParamsError):
            raise
        raise InvalidParamsError(f"Bad noise parameters: {exc}") from exc


def parse_model_overrides(model: str, spec: Optional[str]) -> Dict[str, Any]:
    """Turn ``--params`` into dotted overrides.

    ``spec`` is either a YAML file holding a mapping of model parameters or
    a comma-separated ``name=value`` list, e.g. ``damping=0.05,noise_intensity=0.02``.
    """
    if not spec:
        return {}
    path = Path(spec)
    if path.is_file():
        values: Mapping[str, Any] = load_custom_config(path)
    else:
        values = {}
        for item in spec.split(","):
            name, sep, raw = item.partition("=")
            if not sep or not name.strip():
                raise InvalidParamsError(f"Bad --params entry {item!r}; expected name=value")
            try:
                values[name.strip()] = float(raw)
            except ValueError as exc:
                raise InvalidParamsError(f"Bad --params value {raw!r} for {name.strip()!r}") from exc
    return {f"models.{model}.{name}": value for name, value in values.items()}


def params_digest(params: Flat) -> str:
    serialized = json.dumps(params, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(serialized.encode("utf-8")).hexdigest()
