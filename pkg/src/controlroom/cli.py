"""Command-line surface for training, generation, replay, metrics, and serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import gateway, harness, nlu, report
from .config import PipelineConfig
from .harness import (
    FIXTURES_DIR,
    MetricsReport,
    build_task_suite,
    default_model,
    generate_corpus,
    grid_outcomes,
    load_outcome_grid,
    load_scenario,
    module_success_rates,
    run_scenario,
    run_suite,
    save_scenario,
    task_completion_rate,
)


def _load_config(path: str | None) -> PipelineConfig:
    return PipelineConfig.load(path) if path else PipelineConfig()


def _load_model(path: str | None) -> nlu.NluModel:
    return nlu.load_model(path) if path else default_model()


@click.group()
def main() -> None:
    """Multimodal control-room pipeline tools."""


@main.command("gen-corpus")
@click.option("-n", "count", default=200, show_default=True, help="Number of utterances.")
@click.option("--seed", default=7, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def gen_corpus(count: int, seed: int, output: str) -> None:
    """Generate a labeled utterance corpus from the template grammar."""
    corpus = generate_corpus(count, seed)
    nlu.save_corpus(corpus, output)
    click.echo(f"wrote {len(corpus)} utterances to {output}")


@main.command("train-nlu")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def train_nlu(corpus: str, output: str) -> None:
    """Train the intent model from a corpus file and persist it."""
    examples = nlu.load_corpus(corpus)
    model = nlu.train(examples)
    nlu.save_model(model, output)
    click.echo(f"trained on {len(examples)} utterances -> {output}")


@main.command("gen-trace")
@click.option("--target", type=click.IntRange(1, 9), required=True)
@click.option("--jitter", default=0.0, show_default=True, help="Hand jitter sigma in meters.")
@click.option("--dwell-ms", default=1500, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def gen_trace(target: int, jitter: float, dwell_ms: int, seed: int, config_path: str | None, output: str) -> None:
    """Generate a synthetic skeleton stream pointing at one monitor."""
    config = _load_config(config_path)
    profile = harness.TraceProfile(jitter_sigma=jitter, dwell_ms=dwell_ms, seed=seed)
    frames, annotations = harness.generate_skeleton_trace(
        target, profile, config.screen, config.sensor
    )
    with open(output, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(harness._frame_to_dict(frame), sort_keys=True) + "\n")
    click.echo(f"wrote {len(frames)} frames to {output} (dwell {annotations[0]})")


@main.command("gen-suite")
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--jitter", default=0.0, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def gen_suite(out_dir: str, jitter: float, seed: int, config_path: str | None) -> None:
    """Write the six scripted tasks as skeleton-level scenario files."""
    config = _load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for scenario in build_task_suite(config, jitter=jitter, seed=seed):
        save_scenario(scenario, out / f"{scenario.scenario_id}.json")
        click.echo(f"wrote {out / (scenario.scenario_id + '.json')}")


@main.command("run-scenario")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Write the event log (NDJSON).")
def run_scenario_cmd(scenario_file: str, config_path: str | None, model_path: str | None, log_path: str | None) -> None:
    """Replay one scenario and report its outcome."""
    scenario = load_scenario(scenario_file)
    run = run_scenario(scenario, _load_config(config_path), _load_model(model_path))
    if log_path:
        with open(log_path, "w", encoding="utf-8") as fh:
            for record in run.log:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    click.echo(
        f"{scenario.scenario_id}: {run.outcome.label} "
        f"(commands {len(run.commands)}, clarifications {run.outcome.clarifications})"
    )
    if run.outcome.label == harness.OUTCOME_FAILURE:
        sys.exit(1)


@main.command("run-suite")
@click.argument("scenario_dir", type=click.Path(exists=True, file_okay=False), required=False)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--report-dir", type=click.Path(file_okay=False), help="Write CSV tables and figures here.")
@click.option("--jitter", default=0.0, show_default=True, help="Used when generating the built-in suite.")
@click.option("--seed", default=1, show_default=True)
def run_suite_cmd(
    scenario_dir: str | None,
    config_path: str | None,
    model_path: str | None,
    report_dir: str | None,
    jitter: float,
    seed: int,
) -> None:
    """Replay every scenario in a directory (default: the built-in six tasks).

    Exits nonzero when any scenario fails.
    """
    config = _load_config(config_path)
    model = _load_model(model_path)
    if scenario_dir:
        files = sorted(Path(scenario_dir).glob("*.json"))
        if not files:
            raise click.ClickException(f"no scenario files in {scenario_dir}")
        scenarios = [load_scenario(f) for f in files]
    else:
        scenarios = build_task_suite(config, jitter=jitter, seed=seed)
    runs, metrics = run_suite(scenarios, config, model)
    for run in runs:
        click.echo(f"{run.scenario.scenario_id}: {run.outcome.label}")
    click.echo(f"task completion rate: {metrics.task_completion_rate:.4f}")
    if metrics.nlu_success_rate is not None:
        click.echo(f"nlu success rate: {metrics.nlu_success_rate:.4f}")
    if metrics.gesture_accuracy is not None:
        click.echo(f"gesture accuracy: {metrics.gesture_accuracy:.4f}")
    if report_dir:
        for path in report.write_suite_report(metrics, report_dir):
            click.echo(f"wrote {path}")
    if any(r.outcome.label == harness.OUTCOME_FAILURE for r in runs):
        sys.exit(1)


@main.command("metrics")
@click.argument("source", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--report-dir", type=click.Path(file_okay=False), help="Write CSV tables and figures here.")
def metrics_cmd(source: str | None, report_dir: str | None) -> None:
    """Recompute evaluation metrics from a log file or the study fixture.

    SOURCE may be an NDJSON event log (from run-scenario --log) or a JSON
    outcome-grid fixture; with no SOURCE the shipped study fixture is used.
    """
    if source:
        lines = [ln for ln in Path(source).read_text(encoding="utf-8").splitlines() if ln.strip()]
        head = None
        if lines:
            try:
                head = json.loads(lines[0])
            except json.JSONDecodeError:
                head = None  # pretty-printed fixture JSON, not NDJSON
        if isinstance(head, dict) and "grid" not in head:
            # NDJSON event log from run-scenario --log
            records = [json.loads(ln) for ln in lines]
            nlu_rate, gesture_rate = module_success_rates(records)
            click.echo(f"nlu success rate: {nlu_rate:.4f}")
            click.echo(f"gesture accuracy: {gesture_rate:.4f}")
            return
    tasks, users, grid = load_outcome_grid(source)
    outcomes = grid_outcomes(grid)
    rate = task_completion_rate(outcomes)
    counts = {label: outcomes.count(label) for label in ("S", "PS", "F")}
    click.echo(f"outcomes: {counts}")
    click.echo(f"task completion rate: {rate:.4f}")
    fixture_rates = json.loads((FIXTURES_DIR / "module_rates.json").read_text())
    nlu_rate, gesture_rate = module_success_rates(fixture_rates["records"])
    click.echo(f"nlu success rate (study fixture): {nlu_rate:.2f}")
    click.echo(f"gesture accuracy (study fixture): {gesture_rate:.2f}")
    if report_dir:
        out_outcomes = [harness.Outcome(label, f"{u}/{t}") for u, row in zip(users, grid) for t, label in zip(tasks, row)]
        metrics_report = MetricsReport(rate, nlu_rate, gesture_rate, tuple(out_outcomes))
        for path in report.write_suite_report(metrics_report, report_dir, grid, tasks, users):
            click.echo(f"wrote {path}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--room-mode", type=click.Choice(["shared", "isolated"]), default="shared", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--static-dir", type=click.Path(file_okay=False), help="Serve the UI's built assets.")
def serve_cmd(
    host: str,
    port: int,
    room_mode: str,
    config_path: str | None,
    model_path: str | None,
    static_dir: str | None,
) -> None:
    """Run the WebSocket gateway over a live pipeline."""
    click.echo(f"serving on ws://{host}:{port}{gateway.WS_PATH} (rooms: {room_mode})")
    gateway.run(
        _load_config(config_path),
        _load_model(model_path),
        host=host,
        port=port,
        room_mode=room_mode,
        static_dir=static_dir,
    )


if __name__ == "__main__":
    main()
