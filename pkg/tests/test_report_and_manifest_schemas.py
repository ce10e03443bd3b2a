"""Diagnosis report and run manifest documents."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from oscillodx.classifier import DiagnosisConfig, classify
from oscillodx.errors import ErrorCode, ErrorEntry, OutputNotWritableError
from oscillodx.localize import rank_sources
from oscillodx.report import RunManifest, file_sha256, manifest_path, validate_document, write_json, write_manifest, write_report
from oscillodx.series import MultiChannelRecord
from tests.conftest import sine_series


def sample_manifest(tmp_path: Path, **kwargs) -> RunManifest:
    data = tmp_path / "in.csv"
    data.write_text("time,x\n0,1\n", encoding="utf-8")
    base = dict(
        command="diagnose",
        argv=["diagnose", "--in=in.csv"],
        config={"diagnosis.kurtosis_threshold": 0.45, "diagnosis.window": None},
        params_sources={"diagnosis.kurtosis_threshold": "default"},
        seeds={"bootstrap": 0},
        inputs=[data],
        outputs=[tmp_path / "missing.json"],
    )
    base.update(kwargs)
    return RunManifest(**base)


def test_manifest_path_sits_beside_output(tmp_path: Path) -> None:
    assert manifest_path(tmp_path / "out" / "report.json") == tmp_path / "out" / "report.manifest.json"


def test_manifest_document_is_valid(tmp_path: Path) -> None:
    data = sample_manifest(tmp_path).to_dict()
    ok, problems = validate_document(data, "run_manifest.v1")
    assert ok, problems
    assert data["inputs"][0]["sha256"] == file_sha256(tmp_path / "in.csv")
    assert data["outputs"][0]["sha256"] is None
    assert "integrity.params_digest" in data["stable_fields"]["core"]
    assert "created_at" in data["stable_fields"]["non_core"]


def test_manifest_digest_tracks_config(tmp_path: Path) -> None:
    a = sample_manifest(tmp_path).to_dict()["integrity"]["params_digest"]
    b = sample_manifest(tmp_path, config={"diagnosis.kurtosis_threshold": 0.3}).to_dict()["integrity"]["params_digest"]
    assert a != b
    assert len(a) == 64


def test_manifest_with_errors(tmp_path: Path) -> None:
    manifest = sample_manifest(
        tmp_path,
        exit_code=20,
        errors=[ErrorEntry(code=ErrorCode.INSUFFICIENT_DATA, message="too short", hint="record more")],
        warnings=["dt * omega = 0.6"],
    )
    path = write_manifest(manifest, tmp_path / "report.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    ok, problems = validate_document(data, "run_manifest.v1")
    assert ok, problems
    assert data["errors"][0]["code"] == "insufficient_data"


def test_schema_rejects_unknown_command(tmp_path: Path) -> None:
    data = sample_manifest(tmp_path).to_dict()
    data["command"] = "replay"
    ok, _ = validate_document(data, "run_manifest.v1")
    assert not ok


def test_report_with_ranking_is_valid(tmp_path: Path) -> None:
    strong = sine_series(n=20000, noise_std=0.1, seed=1, label="strong")
    weak = sine_series(n=20000, noise_std=1.0, seed=2, label="weak")
    report = classify(strong, DiagnosisConfig())
    report.ranking = rank_sources(MultiChannelRecord.from_series([weak, strong]))
    path = write_report(report.to_dict(), tmp_path / "report.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    ok, problems = validate_document(data, "diagnosis.v1")
    assert ok, problems
    assert data["ranking"]["top_label"] == "strong"
    assert data["kurtosis"]["ci"]["corr_time"] is not None


def test_report_schema_rejects_unknown_verdict() -> None:
    data = classify(sine_series(n=20000, noise_std=0.1), DiagnosisConfig()).to_dict()
    data["verdict"] = "chaotic"
    ok, problems = validate_document(data, "diagnosis.v1")
    assert not ok and problems


def test_write_json_is_stable_and_reports_unwritable_paths(tmp_path: Path) -> None:
    path = write_json({"b": 1, "a": [1.5, None]}, tmp_path / "x.json")
    assert path.read_text(encoding="utf-8") == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n'
    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OutputNotWritableError):
        write_json({}, blocker / "x.json")
