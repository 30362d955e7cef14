"""Command-line interface.

All analysis subcommands call the core library directly (no server needed);
``serve`` starts the HTTP service wrapping the same code.  Failures print a
stage-labeled message to stderr and exit nonzero.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import synth
from .camera_fit import FitConfig
from .errors import NNSError, StageError
from .io_formats import parse_report, write_signal, write_trajectory
from .pipeline import PipelineConfig, fit_from_paths, run_from_paths
from .shape_model import load_shape_model
from .quant import QuantParams, THRESHOLD_MODES
from .signals import FilterSpec, MODES


def _fail(exc: Exception) -> None:
    if isinstance(exc, StageError):
        click.echo(f"error at stage '{exc.stage}': {exc.cause}", err=True)
    else:
        click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _filter_options(fn):
    fn = click.option("--low", type=float, default=0.3, show_default=True,
                      help="Low cutoff (Hz).")(fn)
    fn = click.option("--high", type=float, default=3.0, show_default=True,
                      help="High cutoff (Hz).")(fn)
    fn = click.option("--order", type=int, default=4, show_default=True,
                      help="Per-pass filter order (even).")(fn)
    fn = click.option("--causal", is_flag=True, default=False,
                      help="Single forward pass instead of zero-phase.")(fn)
    return fn


def _signal_options(fn):
    fn = click.option("--landmark", type=int, default=8, show_default=True,
                      help="Landmark id (0-67).")(fn)
    fn = click.option("--mode", type=click.Choice(MODES), default="euclidean",
                      show_default=True, help="Displacement mode.")(fn)
    return fn


def _quant_options(fn):
    fn = click.option("--min-peak-distance", type=float, default=0.2,
                      show_default=True, help="Minimum cycle spacing (s).")(fn)
    fn = click.option("--max-gap", type=float, default=1.5, show_default=True,
                      help="Maximum intra-burst cycle gap (s).")(fn)
    fn = click.option("--min-cycles", type=int, default=6, show_default=True,
                      help="Minimum cycles per burst.")(fn)
    fn = click.option("--threshold-mode", type=click.Choice(THRESHOLD_MODES),
                      default="mean_abs", show_default=True,
                      help="Peak acceptance threshold.")(fn)
    return fn


def _build_config(landmark, mode, low, high, order, causal,
                  min_peak_distance=0.2, max_gap=1.5, min_cycles=6,
                  threshold_mode="mean_abs") -> PipelineConfig:
    return PipelineConfig(
        landmark_id=landmark,
        mode=mode,
        filter_spec=FilterSpec(low_cut_hz=low, high_cut_hz=high, order=order,
                               zero_phase=not causal),
        quant=QuantParams(min_peak_distance_s=min_peak_distance,
                          max_intra_burst_gap_s=max_gap,
                          min_cycles_per_burst=min_cycles,
                          threshold_mode=threshold_mode),
    )


@click.group()
def main():
    """Contact-less quantification of non-nutritive sucking."""


@main.command()
@click.argument("trajectory", type=click.Path(exists=True))
@click.argument("model", type=click.Path(exists=True))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Fits JSON output path.")
@click.option("--iterations", type=int, default=3, show_default=True)
@click.option("--ridge", type=float, default=1.0, show_default=True)
@click.option("--use-confidence", is_flag=True, default=False,
              help="Weight landmarks by their confidence column.")
def fit(trajectory, model, output, iterations, ridge, use_confidence):
    """Fit camera and shape coefficients for every frame."""
    fit_config = FitConfig(iterations=iterations, ridge=ridge,
                           use_confidence=use_confidence)
    try:
        fits = fit_from_paths(trajectory, model, fit_config, fits_path=output)
    except (NNSError, StageError) as exc:
        _fail(exc)
    click.echo(f"fitted {sum(f is not None for f in fits)}/{len(fits)} frames -> {output}")


@main.command()
@click.argument("trajectory", type=click.Path(exists=True))
@click.argument("model", type=click.Path(exists=True))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Output prefix; writes PREFIX.raw.json and PREFIX.filtered.json.")
@_signal_options
@_filter_options
def signal(trajectory, model, output, landmark, mode, low, high, order, causal):
    """Extract the raw and filtered displacement signals."""
    config = _build_config(landmark, mode, low, high, order, causal)
    try:
        run_from_paths(trajectory, model, config, signal_prefix=output)
    except (NNSError, StageError) as exc:
        _fail(exc)
    click.echo(f"wrote {output}.raw.json and {output}.filtered.json")


@main.command()
@click.argument("trajectory", type=click.Path(exists=True))
@click.argument("model", type=click.Path(exists=True))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Report JSON output path.")
@_signal_options
@_filter_options
@_quant_options
def quantify(trajectory, model, output, landmark, mode, low, high, order, causal,
             min_peak_distance, max_gap, min_cycles, threshold_mode):
    """Detect cycles and bursts; write the outcome report."""
    config = _build_config(landmark, mode, low, high, order, causal,
                           min_peak_distance, max_gap, min_cycles, threshold_mode)
    try:
        result = run_from_paths(trajectory, model, config, report_path=output)
    except (NNSError, StageError) as exc:
        _fail(exc)
    r = result.report
    click.echo(f"{r.total_cycles_detected} cycles, {len(r.bursts)} bursts -> {output}")


def _run_one(args) -> str:
    trajectory, model, out_path, config = args
    run_from_paths(trajectory, model, config, report_path=out_path,
                   signal_prefix=str(Path(out_path).with_suffix("")) + ".signal")
    return str(out_path)


@main.command()
@click.argument("model", type=click.Path(exists=True))
@click.argument("trajectories", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Report path (single input) or output directory (batch).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel workers for batch runs.")
@_signal_options
@_filter_options
@_quant_options
def run(model, trajectories, output, jobs, landmark, mode, low, high, order,
        causal, min_peak_distance, max_gap, min_cycles, threshold_mode):
    """End-to-end: trajectory file(s) -> report (plus signal artifacts).

    With several trajectories, OUTPUT is a directory and each report lands in
    OUTPUT/<name>.report.json; --jobs fans sessions out to worker processes.
    """
    config = _build_config(landmark, mode, low, high, order, causal,
                           min_peak_distance, max_gap, min_cycles, threshold_mode)
    if len(trajectories) == 1 and not Path(output).is_dir():
        try:
            result = run_from_paths(trajectories[0], model, config,
                                    report_path=output,
                                    signal_prefix=str(Path(output).with_suffix("")) + ".signal")
        except (NNSError, StageError) as exc:
            _fail(exc)
        r = result.report
        click.echo(f"{r.total_cycles_detected} cycles, {len(r.bursts)} bursts -> {output}")
        return

    out_dir = Path(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(t, model, str(out_dir / (Path(t).stem + ".report.json")), config)
             for t in trajectories]
    failures = 0
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_one, task): task[0] for task in tasks}
            for future, name in futures.items():
                try:
                    click.echo(f"{name} -> {future.result()}")
                except (NNSError, StageError) as exc:
                    failures += 1
                    if isinstance(exc, StageError):
                        click.echo(f"{name}: error at stage '{exc.stage}': {exc.cause}",
                                   err=True)
                    else:
                        click.echo(f"{name}: error: {exc}", err=True)
    else:
        for task in tasks:
            try:
                click.echo(f"{task[0]} -> {_run_one(task)}")
            except (NNSError, StageError) as exc:
                failures += 1
                if isinstance(exc, StageError):
                    click.echo(f"{task[0]}: error at stage '{exc.stage}': {exc.cause}",
                               err=True)
                else:
                    click.echo(f"{task[0]}: error: {exc}", err=True)
    if failures:
        sys.exit(1)


@main.command("synth")
@click.argument("scenario", type=click.Path(exists=True))
@click.option("-o", "--output", required=True, type=click.Path(),
              help="Output directory (signal.json, truth.json[, trajectory.csv]).")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None,
              help="Shape model; when given, also renders trajectory.csv.")
@click.option("--pose-yaw-amp", type=float, default=0.0, show_default=True,
              help="Yaw oscillation amplitude (rad).")
@click.option("--pose-pitch-amp", type=float, default=0.0, show_default=True,
              help="Pitch oscillation amplitude (rad).")
@click.option("--pixel-noise", type=float, default=0.0, show_default=True,
              help="Pixel noise sd added to projected landmarks.")
@click.option("--drop-fraction", type=float, default=0.0, show_default=True,
              help="Fraction of frames dropped entirely.")
def synth_cmd(scenario, output, model_path, pose_yaw_amp, pose_pitch_amp,
              pixel_noise, drop_fraction):
    """Generate a synthetic session with ground truth."""
    try:
        scn = synth.load_scenario(scenario)
        out_dir = Path(output)
        out_dir.mkdir(parents=True, exist_ok=True)
        sig, truth = synth.generate_signal(scn)
        write_signal(sig, out_dir / "signal.json")
        synth.save_truth(truth, out_dir / "truth.json")
        if model_path is not None:
            script = synth.PoseScript(yaw_amplitude_rad=pose_yaw_amp,
                                      pitch_amplitude_rad=pose_pitch_amp,
                                      pixel_noise_sd=pixel_noise,
                                      drop_fraction=drop_fraction)
            session, _ = synth.generate_trajectory(scn, load_shape_model(model_path),
                                                   script)
            write_trajectory(session, out_dir / "trajectory.csv")
    except (NNSError, StageError) as exc:
        _fail(exc)
    click.echo(f"wrote synthetic session to {output}")


@main.command()
@click.argument("report", type=click.Path(exists=True))
@click.argument("truth", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the score JSON here instead of stdout.")
def score(report, truth, output):
    """Score a report against synthetic ground truth."""
    try:
        rep = parse_report(report)
        tr = synth.load_truth(truth)
        sc = synth.score_detection(rep, tr)
    except (NNSError, StageError) as exc:
        _fail(exc)
    doc = json.dumps(synth.score_to_dict(sc), indent=1)
    if output:
        Path(output).write_text(doc + "\n", encoding="utf-8")
    else:
        click.echo(doc)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--workdir", type=click.Path(), default="./nns-sessions",
              show_default=True, help="Session persistence directory.")
@click.option("--model", "models", multiple=True, metavar="NAME=PATH",
              help="Register a shape model (repeatable).")
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Directory of static UI files to serve at /.")
def serve(host, port, workdir, models, ui_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service.app import create_app

    registry = {}
    for item in models:
        name, _, path = item.partition("=")
        if not path:
            click.echo(f"--model expects NAME=PATH, got {item!r}", err=True)
            sys.exit(1)
        registry[name] = path
    app = create_app(workdir=workdir, model_paths=registry, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
