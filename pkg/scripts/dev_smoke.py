#!/usr/bin/env python3
"""Quick smoke test for local development.

This script simulates a forced oscillation, diagnoses it and prints the
report. It needs no network access and finishes in a few seconds.
"""
from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path


def run_cli(args: list[str]) -> subprocess.CompletedProcess:
    """Run the oscillodx CLI with ``args``."""
    return subprocess.run(
        [sys.executable, "-m", "oscillodx.cli", *args],
        capture_output=True,
        text=True,
    )


def simulate(out_dir: Path) -> Path | None:
    """Simulate 800 s of the default forced model."""
    print("Simulating forced oscillation...")
    csv_path = out_dir / "forced.csv"
    result = run_cli(["simulate", "--model", "forced", "--duration", "800", "--seed", "1", "--out", str(csv_path)])
    if result.returncode != 0:
        print(f"ERROR: simulate failed ({result.returncode}): {result.stderr}")
        return None
    print(f"Simulated: {csv_path}")
    return csv_path


def diagnose(csv_path: Path, out_dir: Path) -> Path | None:
    """Diagnose the simulated record."""
    print("Running diagnosis...")
    report_path = out_dir / "forced.report.json"
    result = run_cli(["diagnose", "--in", str(csv_path), "--channel", "x", "--report", str(report_path)])
    if result.returncode not in (0, 3):
        print(f"ERROR: diagnose failed ({result.returncode}): {result.stderr}")
        return None
    return report_path


def print_summary(report_path: Path) -> bool:
    """Print the verdict and its evidence."""
    print("\n=== Summary ===")
    with report_path.open("r", encoding="utf-8") as f:
        report = json.load(f)
    ci = report["kurtosis"]["ci"]
    print(f"verdict: {report['verdict']}")
    print(f"  kurtosis: {report['kurtosis']['value']:.3f} [{ci['lower']:.3f}, {ci['upper']:.3f}]")
    spike = report.get("spike")
    if spike:
        print(f"  peak: {spike['peak_freq']:.4f} Hz, snr {spike['peak_snr']:.1f} dB, bw_ratio {spike['bw_ratio']:.2f}")
    print(f"  notes: {', '.join(report.get('notes', []))}")
    if report["verdict"] != "forced":
        print("WARNING: expected a forced verdict")
        return False
    return True


def main() -> int:
    out_dir = Path("out") / "smoke_workdir"
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = simulate(out_dir)
    if csv_path is None:
        return 1
    report_path = diagnose(csv_path, out_dir)
    if report_path is None:
        return 1
    if not print_summary(report_path):
        return 1

    print("\nSmoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
