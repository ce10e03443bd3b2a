"""Smoke tests for the CLI."""
from __future__ import annotations

import json
import subprocess
import sys
import warnings
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from oscillodx import cli
from oscillodx.bootstrap import bootstrap_kurtosis_ci
from oscillodx.errors import ResolutionWarning
from oscillodx.report import validate_document
from tests.conftest import invoke, sine_series, write_record_csv


def manifest_of(path: Path) -> dict:
    manifest = json.loads(path.with_name(path.stem + ".manifest.json").read_text(encoding="utf-8"))
    ok, problems = validate_document(manifest, "run_manifest.v1")
    assert ok, problems
    return manifest


def test_cli_help() -> None:
    result = subprocess.run(
        [sys.executable, "-m", "oscillodx.cli", "--help"],
        check=False,
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "Diagnose the mechanism" in result.stdout


def test_simulate_writes_csv_and_manifest(tmp_path: Path) -> None:
    out = tmp_path / "sim.csv"
    result = invoke(["simulate", "--model", "wd", "--duration", "50", "--burn-in", "10", "--seed", "3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# model=wd"
    frame = pd.read_csv(out, comment="#")
    assert list(frame.columns) == ["time", "x", "y"]
    assert len(frame) == 500

    manifest = manifest_of(out)
    assert manifest["command"] == "simulate"
    assert manifest["seeds"]["simulation"] == 3
    assert manifest["params_sources"]["simulation.seed"] == "cli"
    assert manifest["params_sources"]["simulation.dt"] == "default"
    assert manifest["exit_code"] == 0
    assert manifest["outputs"][0]["sha256"] is not None


def test_simulate_is_reproducible(tmp_path: Path) -> None:
    args = ["simulate", "--model", "lc", "--duration", "20", "--burn-in", "5", "--seed", "9"]
    invoke(args + ["--out", str(tmp_path / "a.csv")])
    invoke(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_simulate_reads_config_file(tmp_path: Path) -> None:
    cfg = tmp_path / "user.yaml"
    cfg.write_text("simulation:\n  seed: 5\n  duration: 20.0\n  burn_in: 5.0\n", encoding="utf-8")
    out = tmp_path / "sim.csv"
    result = invoke(["simulate", "--model", "forced", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0, result.output
    manifest = manifest_of(out)
    assert manifest["seeds"]["simulation"] == 5
    assert manifest["params_sources"]["simulation.seed"] == "config"


def test_coarse_step_is_reported_as_warning(tmp_path: Path) -> None:
    out = tmp_path / "sim.csv"
    result = invoke(
        [
            "simulate", "--model", "wd", "--params", "damping=5,natural_freq=6",
            "--dt", "0.1", "--stride", "1", "--duration", "20", "--burn-in", "0", "--out", str(out),
        ]
    )
    assert result.exit_code == 0, result.output
    assert manifest_of(out)["warnings"]


def test_unstable_step_exits_with_numerical_failure(tmp_path: Path) -> None:
    out = tmp_path / "sim.csv"
    result = invoke(["simulate", "--model", "lc", "--params", "growth=200", "--duration", "20", "--out", str(out)])
    assert result.exit_code == 21
    manifest = manifest_of(out)
    assert manifest["errors"][0]["code"] == "stability_error"
    assert not out.exists()


def test_diverging_limit_cycle_exits_with_numerical_failure(tmp_path: Path) -> None:
    out = tmp_path / "sim.csv"
    result = invoke(
        [
            "simulate", "--model", "lc", "--params", "growth=1,hopf_freq=1,noise_intensity=0",
            "--dt", "0.9", "--stride", "1", "--duration", "50", "--burn-in", "0", "--out", str(out),
        ]
    )
    assert result.exit_code == 21
    manifest = manifest_of(out)
    assert manifest["errors"][0]["code"] == "stability_error"
    assert "Reduce dt" in manifest["errors"][0]["hint"]
    assert not out.exists()


def test_unknown_model_is_invalid_params(tmp_path: Path) -> None:
    result = invoke(["simulate", "--model", "chaos", "--out", str(tmp_path / "sim.csv")])
    assert result.exit_code == 13


def test_diagnose_forced_sinusoid(tmp_path: Path) -> None:
    series = sine_series(n=20000, noise_std=0.1, seed=1)
    path = write_record_csv(tmp_path, {"bus": series.samples})
    report_path = tmp_path / "report.json"
    result = invoke(["diagnose", "--in", str(path), "--report", str(report_path)])
    assert result.exit_code == 0, result.output
    assert "forced" in result.output
    report = json.loads(report_path.read_text(encoding="utf-8"))
    ok, problems = validate_document(report, "diagnosis.v1")
    assert ok, problems
    assert report["verdict"] == "forced"
    assert report["channel"] == "bus"
    assert report["ranking"] is None
    manifest = manifest_of(report_path)
    assert manifest["inputs"][0]["path"] == str(path)
    assert manifest["seeds"]["bootstrap"] == 0


def test_diagnose_inconclusive_exit_code(tmp_path: Path) -> None:
    series = sine_series(n=20000, amplitude=1.0, noise_std=0.6, seed=2)
    path = write_record_csv(tmp_path, {"x": series.samples})
    ci = bootstrap_kurtosis_ci(series, reps=200, ci_level=0.9, seed=0)
    epsilon = -0.5 * (ci.lower + ci.upper)
    report_path = tmp_path / "report.json"
    result = invoke(["diagnose", "--in", str(path), "--epsilon", repr(epsilon), "--report", str(report_path)])
    assert result.exit_code == 3
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["verdict"] == "inconclusive"
    assert "kurtosis_ci_straddles_threshold" in report["notes"]
    assert manifest_of(report_path)["exit_code"] == 3


def test_diagnose_multichannel_attaches_ranking(tmp_path: Path) -> None:
    strong = sine_series(n=20000, noise_std=0.1, seed=1)
    weak = sine_series(n=20000, noise_std=1.0, seed=2)
    path = write_record_csv(tmp_path, {"weak": weak.samples, "strong": strong.samples})
    report_path = tmp_path / "report.json"
    result = invoke(["diagnose", "--in", str(path), "--channel", "strong", "--window", "100:1900", "--report", str(report_path)])
    assert result.exit_code == 0, result.output
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["channel"] == "strong"
    assert report["window"] == pytest.approx([100.0, 1900.0])
    assert report["ranking"]["top_label"] == "strong"


def test_diagnose_bad_windows(tmp_path: Path) -> None:
    path = write_record_csv(tmp_path, {"x": sine_series(n=2000).samples})
    report_path = tmp_path / "report.json"
    assert invoke(["diagnose", "--in", str(path), "--window", "abc", "--report", str(report_path)]).exit_code == 13
    assert invoke(["diagnose", "--in", str(path), "--window", "100:900", "--report", str(report_path)]).exit_code == 20
    assert not report_path.exists()


def test_psd_command(tmp_path: Path) -> None:
    path = write_record_csv(tmp_path, {"x": sine_series(n=4000).samples})
    out = tmp_path / "psd.csv"
    result = invoke(["psd", "--in", str(path), "--segment-len", "400", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out, comment="#")
    assert list(frame.columns) == ["freq_hz", "psd"]
    assert len(frame) == 201
    assert np.isclose(frame["freq_hz"][frame["psd"].idxmax()], 0.15)


def test_kurtosis_point_and_moving(tmp_path: Path) -> None:
    path = write_record_csv(tmp_path, {"x": sine_series(n=4000).samples})
    point = tmp_path / "k.csv"
    assert invoke(["kurtosis", "--in", str(path), "--out", str(point)]).exit_code == 0
    row = pd.read_csv(point, comment="#").iloc[0]
    assert row["label"] == "x"
    assert np.isclose(row["kurtosis"], -1.5, atol=1e-3)
    assert row["ci_lower"] <= row["ci_upper"]

    trace = tmp_path / "trace.csv"
    result = invoke(["kurtosis", "--in", str(path), "--moving", "--window-len", "20", "--hop", "10", "--out", str(trace)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(trace, comment="#")
    assert list(frame.columns) == ["time", "kurtosis"]
    assert len(frame) == 39


def test_locate_command(tmp_path: Path) -> None:
    path = write_record_csv(
        tmp_path,
        {
            "b": sine_series(n=20000, noise_std=1.0, seed=2).samples,
            "a": sine_series(n=20000, noise_std=0.2, seed=1).samples,
        },
    )
    out = tmp_path / "rank.csv"
    result = invoke(["locate", "--in", str(path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "top=a" in result.output
    frame = pd.read_csv(out, comment="#")
    assert list(frame["label"]) == ["a", "b"]


def test_locate_needs_two_channels(tmp_path: Path) -> None:
    path = write_record_csv(tmp_path, {"x": sine_series(n=2000).samples})
    assert invoke(["locate", "--in", str(path), "--out", str(tmp_path / "rank.csv")]).exit_code == 20


def test_montecarlo_command(tmp_path: Path) -> None:
    out = tmp_path / "hist.csv"
    result = invoke(
        ["montecarlo", "--model", "forced", "--runs", "30", "--duration", "40", "--bins", "5", "--seed", "2", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    hist = pd.read_csv(out, comment="#")
    assert list(hist.columns) == ["bin_left", "bin_right", "count"]
    assert hist["count"].sum() == 30
    runs = pd.read_csv(tmp_path / "hist.runs.csv", comment="#")
    assert len(runs) == 30
    assert (runs["kurtosis"] < -1.0).all()
    assert len(manifest_of(out)["outputs"]) == 2


def test_log_file_lines_carry_the_command(tmp_path: Path) -> None:
    log_path = tmp_path / "logs" / "run.log"
    out = tmp_path / "sim.csv"
    result = invoke(["simulate", "--model", "wd", "--duration", "20", "--burn-in", "5", "--log-file", str(log_path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = log_path.read_text(encoding="utf-8").splitlines()
    assert any("[DEBUG] simulate oscillodx.sde:" in line for line in lines)
    assert any("simulate took" in line for line in lines)


def test_non_resolution_warnings_are_logged_and_kept(monkeypatch: pytest.MonkeyPatch) -> None:
    logged: list[str] = []
    monkeypatch.setattr(cli.logger, "warning", lambda msg, *args: logged.append(msg % args))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        warnings.warn("step undersamples the period", ResolutionWarning)
        warnings.warn("overflow encountered in square", RuntimeWarning)
    messages = cli._report_warnings(caught)
    assert messages == ["step undersamples the period", "RuntimeWarning: overflow encountered in square"]
    assert len(logged) == 1 and logged[0].startswith("RuntimeWarning: overflow encountered in square")
