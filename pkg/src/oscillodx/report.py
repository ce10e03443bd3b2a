"""JSON reports and run manifests."""
from __future__ import annotations

import hashlib
import json
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, List, Tuple

from jsonschema import Draft202012Validator

from . import __version__
from .config import PROJECT_ROOT
from .constants import DIAGNOSIS_SCHEMA_VERSION, MANIFEST_SUFFIX, PACKAGE_NAME, RUN_MANIFEST_SCHEMA_VERSION
from .errors import ErrorEntry, OutputNotWritableError
from .logging_utils import get_logger
from .params import params_digest

logger = get_logger(__name__)

SCHEMA_DIR = PROJECT_ROOT / "schemas"


def _repo_version() -> str:
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return __version__


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(output_path: Path) -> Path:
    """``<dir>/<stem>.manifest.json`` beside the primary output."""
    output_path = Path(output_path)
    return output_path.with_name(output_path.stem + MANIFEST_SUFFIX)


def _file_entry(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        return {"path": str(path), "sha256": None, "size_bytes": None}
    return {"path": str(path), "sha256": file_sha256(path), "size_bytes": path.stat().st_size}


def _stable_fields() -> Dict[str, Any]:
    return {
        "core": [
            "schema_version",
            "command",
            "argv",
            "config",
            "params_sources",
            "seeds",
            "inputs",
            "outputs",
            "integrity.params_digest",
        ],
        "non_core": ["created_at", "tool.version", "tool.python", "exit_code", "errors", "warnings"],
        "notes": (
            "Core fields reproduce every output byte for byte when replayed with the same tool version. "
            "Non-core fields describe the machine and the moment of the run."
        ),
    }


@dataclass
class RunManifest:
    """Provenance of one CLI run: command, effective configuration, seeds and file digests."""

    command: str
    argv: List[str]
    config: Dict[str, Any]
    params_sources: Dict[str, str]
    seeds: Dict[str, int]
    inputs: List[Path] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)
    exit_code: int = 0
    errors: List[ErrorEntry] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": RUN_MANIFEST_SCHEMA_VERSION,
            "created_at": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "command": self.command,
            "argv": list(self.argv),
            "config": self.config,
            "params_sources": dict(self.params_sources),
            "seeds": dict(self.seeds),
            "inputs": [_file_entry(p) for p in self.inputs],
            "outputs": [_file_entry(p) for p in self.outputs],
            "tool": {
                "name": PACKAGE_NAME,
                "version": _repo_version(),
                "python": platform.python_version(),
                "platform": platform.platform(),
                "executable": sys.executable,
            },
            "integrity": {"params_digest": params_digest(self.config)},
            "exit_code": self.exit_code,
            "errors": [err.to_dict() for err in self.errors],
            "warnings": list(self.warnings),
            "stable_fields": _stable_fields(),
        }


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, ensure_ascii=False, sort_keys=True, indent=2, allow_nan=False)
            f.write("\n")
    except OSError as exc:
        raise OutputNotWritableError(f"Cannot write {path}: {exc}", hint="Check the output directory permissions.") from exc
    return path


def validate_document(data: Dict[str, Any], schema_version: str) -> Tuple[bool, List[str]]:
    """Validate ``data`` against ``schemas/<schema_version>.schema.json``."""

    schema_path = SCHEMA_DIR / f"{schema_version}.schema.json"
    with schema_path.open("r", encoding="utf-8") as f:
        schema = json.load(f)
    validator = Draft202012Validator(schema)
    errors = [error.message for error in validator.iter_errors(data)]
    return len(errors) == 0, errors


def write_report(report: Dict[str, Any], path: Path) -> Path:
    ok, problems = validate_document(report, DIAGNOSIS_SCHEMA_VERSION)
    if not ok:
        logger.warning("diagnosis report does not match %s: %s", DIAGNOSIS_SCHEMA_VERSION, "; ".join(problems))
    return write_json(report, path)


def write_manifest(manifest: RunManifest, primary_output: Path) -> Path:
    data = manifest.to_dict()
    ok, problems = validate_document(data, RUN_MANIFEST_SCHEMA_VERSION)
    if not ok:
        logger.warning("run manifest does not match %s: %s", RUN_MANIFEST_SCHEMA_VERSION, "; ".join(problems))
    path = write_json(data, manifest_path(primary_output))
    logger.debug("wrote manifest %s", path)
    return path
