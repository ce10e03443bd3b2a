"""YAML configuration files for oscillodx.

Sections are flattened and merged by :mod:`oscillodx.params`; this module
only locates and parses files.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import yaml

from .errors import InvalidParamsError

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "configs" / "default.yaml"


class ConfigError(InvalidParamsError):
    """Raised when a configuration file is missing or malformed."""


def load_default_config() -> Dict[str, Any]:
    """Load ``configs/default.yaml``.

    Raises
    ------
    ConfigError
        If the file is missing or cannot be parsed.
    """

    if not DEFAULT_CONFIG_PATH.exists():
        raise ConfigError(f"Default config not found at {DEFAULT_CONFIG_PATH}")
    return load_custom_config(DEFAULT_CONFIG_PATH)


def load_custom_config(path: Path) -> Dict[str, Any]:
    """Load a YAML mapping of sections (``simulation``, ``models``, ...) from ``path``."""

    try:
        with Path(path).open("r", encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Failed to parse YAML: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ConfigError(f"Config file must contain a mapping: {path}")
    return loaded
