"""Command-line interface for oscillodx."""
from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import typer

from .classifier import classify
from .constants import MIN_BOOTSTRAP_SAMPLES, MODEL_KEYS, VERDICT_INCONCLUSIVE
from .csv_io import (
    read_csv,
    write_csv,
    write_histogram_csv,
    write_kurtosis_csv,
    write_point_kurtosis_csv,
    write_psd_csv,
    write_ranking_csv,
)
from .bootstrap import bootstrap_kurtosis_ci
from .errors import ErrorCode, ErrorEntry, ExitCode, InvalidParamsError, OscillodxError, ResolutionWarning, exit_code_for
from .localize import rank_or_none, rank_sources
from .logging_utils import get_logger, log_elapsed, setup_logging
from .models import simulate
from .montecarlo import monte_carlo_kurtosis
from .noise import add_measurement_noise
from .params import diagnosis_config, model_params, noise_spec, parse_model_overrides, resolve_params, sim_config
from .report import RunManifest, write_manifest, write_report
from .series import MultiChannelRecord, TimeSeries, Window
from .spectrum import welch_psd
from .stats import excess_kurtosis, moving_kurtosis

app = typer.Typer(help="Diagnose the mechanism of sustained oscillations in time-series records.")
logger = get_logger(__name__)


@dataclass
class _Run:
    """Book-keeping for one command: what went in, what came out, what went wrong."""

    command: str
    argv: List[str]
    primary: Optional[Path] = None
    config: Dict[str, Any] = field(default_factory=dict)
    sources: Dict[str, str] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    inputs: List[Path] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)


def _argv(ctx: typer.Context) -> List[str]:
    args = [ctx.info_name or ""]
    for name, value in sorted(ctx.params.items()):
        if value is None or value is False:
            continue
        flag = "--" + name.replace("_", "-")
        args.append(flag if value is True else f"{flag}={value}")
    return args


def _report_warnings(caught: List[warnings.WarningMessage]) -> List[str]:
    """Echo resolution warnings, log every other category; all go to the manifest."""

    messages: List[str] = []
    for w in caught:
        if issubclass(w.category, ResolutionWarning):
            typer.echo(f"WARNING: {w.message}", err=True)
            messages.append(str(w.message))
        else:
            logger.warning("%s: %s (%s:%d)", w.category.__name__, w.message, w.filename, w.lineno)
            messages.append(f"{w.category.__name__}: {w.message}")
    return messages


def _execute(ctx: typer.Context, primary: Optional[str], body: Callable[[_Run], int]) -> None:
    run = _Run(command=ctx.info_name or "", argv=_argv(ctx), primary=Path(primary) if primary else None)
    errors: List[ErrorEntry] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        try:
            with log_elapsed(logger, run.command):
                code = body(run)
        except OscillodxError as exc:
            hint = f" (hint: {exc.hint})" if exc.hint else ""
            typer.echo(f"ERROR: {exc.message}{hint}", err=True)
            errors.append(exc.to_entry())
            code = exit_code_for(exc)
        except Exception as exc:  # pragma: no cover - unexpected failure
            logger.exception("internal error in %s", run.command)
            typer.echo(f"ERROR: internal error: {exc}", err=True)
            errors.append(ErrorEntry(code=ErrorCode.INTERNAL_ERROR, message=str(exc)))
            code = exit_code_for(exc)
    run_warnings = _report_warnings(caught)

    if run.primary is not None:
        manifest = RunManifest(
            command=run.command,
            argv=run.argv,
            config=run.config,
            params_sources=run.sources,
            seeds=run.seeds,
            inputs=run.inputs,
            outputs=run.outputs,
            exit_code=code,
            errors=errors,
            warnings=run_warnings,
        )
        try:
            write_manifest(manifest, run.primary)
        except OscillodxError as exc:
            typer.echo(f"ERROR: {exc.message}", err=True)
            if code == ExitCode.SUCCESS:
                code = exit_code_for(exc)
    raise typer.Exit(code=code)


def _parse_window(window: Optional[str]) -> Optional[Window]:
    if window is None:
        return None
    start, sep, end = window.partition(":")
    try:
        if not sep:
            raise ValueError(window)
        return float(start), float(end)
    except ValueError as exc:
        raise InvalidParamsError(f"Bad --window {window!r}; expected <start>:<end> in seconds") from exc


def _check_model(model: str) -> str:
    if model not in MODEL_KEYS:
        raise InvalidParamsError(f"Unknown model {model!r}; expected one of {', '.join(MODEL_KEYS)}")
    return model


def _load_record(run: _Run, input_path: str, window: Optional[Window], params: Dict[str, Any], seed: int) -> MultiChannelRecord:
    path = Path(input_path)
    run.inputs.append(path)
    record = read_csv(path, window=window)
    spec = noise_spec(params, seed)
    run.seeds["noise"] = spec.seed
    return add_measurement_noise(record, spec)


def _channel(record: MultiChannelRecord, label: Optional[str]) -> TimeSeries:
    return record[label] if label is not None else next(iter(record))


def _resolve(run: _Run, config: Optional[str], overrides: Dict[str, Any]) -> Dict[str, Any]:
    params, sources = resolve_params(config, overrides)
    run.config, run.sources = dict(params), sources
    return params


@app.command("simulate")
def simulate_command(
    ctx: typer.Context,
    model: str = typer.Option(..., "--model", help="Mechanism: wd, lc or forced"),
    params_spec: Optional[str] = typer.Option(None, "--params", help="Model parameters: YAML file or name=value,... list"),
    duration: Optional[float] = typer.Option(None, "--duration", help="Recorded length after burn-in (s)"),
    dt: Optional[float] = typer.Option(None, "--dt", help="Integration step (s)"),
    burn_in: Optional[float] = typer.Option(None, "--burn-in", help="Discarded transient (s)"),
    output_stride: Optional[int] = typer.Option(None, "--stride", help="Record every n-th integration step"),
    seed: Optional[int] = typer.Option(None, "--seed", help="RNG seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    out: str = typer.Option(..., "--out", help="Output CSV (time,x,y)"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Simulate one sample path of a mechanism and write it as CSV."""

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        key = _check_model(model)
        overrides = {
            "simulation.duration": duration,
            "simulation.dt": dt,
            "simulation.burn_in": burn_in,
            "simulation.output_stride": output_stride,
            "simulation.seed": seed,
            "noise.std": noise_std,
            **parse_model_overrides(key, params_spec),
        }
        params = _resolve(run, config, overrides)
        cfg = sim_config(params)
        run.seeds["simulation"] = cfg.seed
        x, y = simulate(model_params(params, key), cfg)
        spec = noise_spec(params, cfg.seed)
        run.seeds["noise"] = spec.seed
        record = add_measurement_noise(MultiChannelRecord.from_series([x, y]), spec)
        run.outputs.append(write_csv(record, Path(out), comments={"model": key, "seed": cfg.seed, "noise_std": spec.std}))
        typer.echo(f"simulate: {key} {len(x)} samples at dt={x.dt:g} s -> {out}")
        return ExitCode.SUCCESS

    _execute(ctx, out, body)


@app.command("diagnose")
def diagnose_command(
    ctx: typer.Context,
    input_path: str = typer.Option(..., "--in", help="Input CSV (time,<labels...>)"),
    channel: Optional[str] = typer.Option(None, "--channel", help="Channel to diagnose (default: first)"),
    window: Optional[str] = typer.Option(None, "--window", help="Analysis window <start>:<end> in seconds"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Kurtosis threshold for the Gaussian gate"),
    spike_bw_ratio: Optional[float] = typer.Option(None, "--spike-bw-ratio", help="Maximum width of a thin spike (resolution bins)"),
    bootstrap_reps: Optional[int] = typer.Option(None, "--bootstrap-reps", help="Bootstrap replicates"),
    psd_segment: Optional[float] = typer.Option(None, "--psd-segment", help="Spike-test segment length (s)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Bootstrap and measurement-noise seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    report_path: str = typer.Option(..., "--report", help="Output JSON report"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Classify a channel as weakly damped, limit cycle, forced or no oscillation.

    Exits with 3 when the verdict is inconclusive.
    """

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        span = _parse_window(window)
        overrides = {
            "diagnosis.kurtosis_threshold": epsilon,
            "diagnosis.spike_bw_ratio_max": spike_bw_ratio,
            "diagnosis.bootstrap_reps": bootstrap_reps,
            "diagnosis.psd_segment_s": psd_segment,
            "diagnosis.seed": seed,
            "noise.std": noise_std,
        }
        params = _resolve(run, config, overrides)
        dcfg = diagnosis_config(params, span)
        run.config["diagnosis.window"] = list(span) if span else None
        run.seeds["bootstrap"] = dcfg.seed
        record = _load_record(run, input_path, span, params, dcfg.seed)
        report = classify(_channel(record, channel), dcfg)
        report.ranking = rank_or_none(record, dcfg.kurtosis_threshold, span)
        run.outputs.append(write_report(report.to_dict(), Path(report_path)))
        typer.echo(f"diagnose: {report.channel} -> {report.verdict} (kurtosis {report.kurtosis:.3f})")
        return ExitCode.INCONCLUSIVE if report.verdict == VERDICT_INCONCLUSIVE else ExitCode.SUCCESS

    _execute(ctx, report_path, body)


@app.command("locate")
def locate_command(
    ctx: typer.Context,
    input_path: str = typer.Option(..., "--in", help="Multi-channel input CSV"),
    window: Optional[str] = typer.Option(None, "--window", help="Analysis window <start>:<end> in seconds"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Kurtosis threshold for the non-informative flag"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Measurement-noise seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    out: str = typer.Option(..., "--out", help="Output ranking CSV"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Rank channels by |excess kurtosis| to point at the oscillation source."""

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        span = _parse_window(window)
        params = _resolve(run, config, {"diagnosis.kurtosis_threshold": epsilon, "diagnosis.seed": seed, "noise.std": noise_std})
        run.config["locate.window"] = list(span) if span else None
        record = _load_record(run, input_path, span, params, int(params["diagnosis.seed"]))
        ranking = rank_sources(record, float(params["diagnosis.kurtosis_threshold"]), span)
        run.outputs.append(write_ranking_csv(ranking, Path(out)))
        flags = ",".join(ranking.flags) or "none"
        typer.echo(f"locate: top={ranking.top_label} flags={flags} -> {out}")
        return ExitCode.SUCCESS

    _execute(ctx, out, body)


@app.command("psd")
def psd_command(
    ctx: typer.Context,
    input_path: str = typer.Option(..., "--in", help="Input CSV"),
    channel: Optional[str] = typer.Option(None, "--channel", help="Channel (default: first)"),
    window: Optional[str] = typer.Option(None, "--window", help="Analysis window <start>:<end> in seconds"),
    segment_len: Optional[int] = typer.Option(None, "--segment-len", help="Samples per Welch segment"),
    overlap: Optional[float] = typer.Option(None, "--overlap", help="Segment overlap fraction"),
    taper: Optional[str] = typer.Option(None, "--taper", help="Taper window name"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Measurement-noise seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    out: str = typer.Option(..., "--out", help="Output CSV (freq_hz,psd)"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Estimate the power spectral density of a channel (Welch)."""

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        span = _parse_window(window)
        overrides = {
            "psd.segment_len": segment_len,
            "psd.overlap_frac": overlap,
            "psd.taper": taper,
            "diagnosis.seed": seed,
            "noise.std": noise_std,
        }
        params = _resolve(run, config, overrides)
        record = _load_record(run, input_path, span, params, int(params["diagnosis.seed"]))
        series = _channel(record, channel).window(span)
        seg = params["psd.segment_len"]
        spectrum = welch_psd(series, None if seg is None else int(seg), float(params["psd.overlap_frac"]), str(params["psd.taper"]))
        run.outputs.append(write_psd_csv(spectrum, Path(out), comments={"channel": series.label}))
        typer.echo(f"psd: {series.label} {len(spectrum)} bins, resolution {spectrum.resolution_bw:.3g} Hz -> {out}")
        return ExitCode.SUCCESS

    _execute(ctx, out, body)


@app.command("kurtosis")
def kurtosis_command(
    ctx: typer.Context,
    input_path: str = typer.Option(..., "--in", help="Input CSV"),
    channel: Optional[str] = typer.Option(None, "--channel", help="Channel (default: first)"),
    window: Optional[str] = typer.Option(None, "--window", help="Analysis window <start>:<end> in seconds"),
    moving: bool = typer.Option(False, "--moving/--point", help="Moving-window trace instead of one value"),
    window_len: Optional[float] = typer.Option(None, "--window-len", help="Moving window length (s)"),
    hop: Optional[float] = typer.Option(None, "--hop", help="Moving window hop (s)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Bootstrap and measurement-noise seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    out: str = typer.Option(..., "--out", help="Output CSV"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Excess kurtosis of a channel, as one value with a bootstrap interval or as a moving trace."""

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        span = _parse_window(window)
        overrides = {
            "moving_kurtosis.window_len": window_len,
            "moving_kurtosis.hop": hop,
            "diagnosis.seed": seed,
            "noise.std": noise_std,
        }
        params = _resolve(run, config, overrides)
        record = _load_record(run, input_path, span, params, int(params["diagnosis.seed"]))
        series = _channel(record, channel).window(span)
        if moving:
            trace = moving_kurtosis(series, float(params["moving_kurtosis.window_len"]), float(params["moving_kurtosis.hop"]))
            run.outputs.append(write_kurtosis_csv(trace, Path(out), comments={"channel": series.label}))
            typer.echo(f"kurtosis: {series.label} {len(trace)} windows -> {out}")
            return ExitCode.SUCCESS
        value = excess_kurtosis(series)
        interval = None
        if len(series) >= MIN_BOOTSTRAP_SAMPLES:
            dcfg = diagnosis_config(params)
            run.seeds["bootstrap"] = dcfg.seed
            interval = bootstrap_kurtosis_ci(series, dcfg.bootstrap_reps, dcfg.ci_level, seed=dcfg.seed)
        run.outputs.append(write_point_kurtosis_csv(series.label, value, interval, Path(out)))
        typer.echo(f"kurtosis: {series.label} {value:.4f} -> {out}")
        return ExitCode.SUCCESS

    _execute(ctx, out, body)


@app.command("montecarlo")
def montecarlo_command(
    ctx: typer.Context,
    model: str = typer.Option(..., "--model", help="Mechanism: wd, lc or forced"),
    params_spec: Optional[str] = typer.Option(None, "--params", help="Model parameters: YAML file or name=value,... list"),
    runs: Optional[int] = typer.Option(None, "--runs", help="Number of independent sample paths"),
    duration: Optional[float] = typer.Option(None, "--duration", help="Recorded length of each path (s)"),
    dt: Optional[float] = typer.Option(None, "--dt", help="Integration step (s)"),
    ci_level: Optional[float] = typer.Option(None, "--ci-level", help="Empirical interval level"),
    bins: Optional[int] = typer.Option(None, "--bins", help="Histogram bins"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes"),
    seed: Optional[int] = typer.Option(None, "--seed", help="RNG seed"),
    noise_std: Optional[float] = typer.Option(None, "--noise-std", help="Measurement noise standard deviation"),
    out: str = typer.Option(..., "--out", help="Output histogram CSV"),
    config: Optional[str] = typer.Option(None, "--config", help="Path to config file"),
    verbose: bool = typer.Option(False, "--verbose", help="Enable verbose (DEBUG) logging"),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Path to log file"),
) -> None:
    """Kurtosis histogram and empirical interval over many simulated paths."""

    setup_logging(verbose=verbose, log_file=Path(log_file) if log_file else None, command=ctx.info_name)

    def body(run: _Run) -> int:
        key = _check_model(model)
        overrides = {
            "montecarlo.runs": runs,
            "montecarlo.duration": duration,
            "montecarlo.ci_level": ci_level,
            "montecarlo.bins": bins,
            "montecarlo.workers": workers,
            "simulation.dt": dt,
            "simulation.seed": seed,
            "noise.std": noise_std,
            **parse_model_overrides(key, params_spec),
        }
        params = _resolve(run, config, overrides)
        cfg = sim_config({**params, "simulation.duration": params["montecarlo.duration"]})
        run.seeds["simulation"] = cfg.seed
        result = monte_carlo_kurtosis(
            model_params(params, key),
            cfg,
            runs=int(params["montecarlo.runs"]),
            ci_level=float(params["montecarlo.ci_level"]),
            bins=int(params["montecarlo.bins"]),
            workers=int(params["montecarlo.workers"]),
            noise_std=noise_spec(params, cfg.seed).std,
        )
        run.outputs.extend(write_histogram_csv(result, Path(out)))
        typer.echo(
            f"montecarlo: {key} {result.runs} runs, {100 * result.ci_level:.0f}% interval "
            f"[{result.lower:.3f}, {result.upper:.3f}] -> {out}"
        )
        return ExitCode.SUCCESS

    _execute(ctx, out, body)


def main(argv: Optional[list[str]] = None) -> int:
    """Entrypoint for console script."""

    argv = argv if argv is not None else sys.argv[1:]
    app(prog_name="oscillodx", args=list(argv))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
