"""Command-line entry points.

Exit codes: 0 on success (including "no violation"), 2 when a violation was
found but no candidate fixed it, 1 on errors.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .localizer import locate
from .mudrive import MuDriveSyntaxError, parse_program, validate
from .mudrive.catalog import PlannerParams
from .mudrive.schema import schema_json
from .pipeline import PipelineConfig, cmd_repair, cmd_sweep_delta
from .promptgen import build_prompt, bundle_to_json
from .repair_llm import BackendConfig
from .simulator import (
    PAIRED_SPECS,
    benchmark_suite,
    evaluate_trace,
    load_script,
    run_scenario,
    scenario_by_id,
)
from .spec_lang import BUILTIN_SPEC_ENTRIES, parse_spec, resolve_spec
from .trace_model import build_trace, load_record, save_record


def _load_config(path):
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON file with default option values.")
@click.pass_context
def main(ctx, config_path):
    """Trace analysis and rule-based driving strategy repair."""
    ctx.obj = _load_config(config_path)


def _backend_config(ctx, backend, model, endpoint):
    cfg = ctx.obj or {}
    return BackendConfig(
        backend=backend or cfg.get("backend", "mock"),
        model=model or cfg.get("model", BackendConfig.model),
        endpoint=endpoint or cfg.get("endpoint", BackendConfig.endpoint),
    )


@main.command()
@click.option("--record", required=True, type=click.Path(exists=True))
@click.option("--spec", required=True)
@click.option("--delta", type=float, default=15.0, show_default=True)
@click.option("--dt", type=float, default=0.1, show_default=True)
def localize(record, spec, delta, dt):
    """Find the violation and near-miss moments of a record."""
    entry = resolve_spec(spec)
    trace = build_trace(load_record(record), dt=dt)
    moments = locate(parse_spec(entry.stl), trace, delta)
    click.echo(json.dumps({
        "spec": entry.name,
        "delta": delta,
        "violation_step": moments.violation_step,
        "near_miss_step": moments.near_miss_step,
        "rho_at_each": list(moments.prefix_rho),
    }, indent=2))
    if moments.violation_step is None:
        click.echo("no violation found", err=True)


@main.command("prompt")
@click.option("--record", required=True, type=click.Path(exists=True))
@click.option("--spec", required=True)
@click.option("--delta", type=float, default=15.0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def prompt_cmd(record, spec, delta, out_dir):
    """Render the two critical moments and the six-segment text prompt."""
    entry = resolve_spec(spec)
    frames = load_record(record)
    trace = build_trace(frames)
    moments = locate(parse_spec(entry.stl), trace, delta)
    if not moments.located:
        raise click.ClickException("record does not violate the spec;"
                                   " nothing to prompt")
    bundle = build_prompt(moments, frames, entry.name, entry.prose,
                          PlannerParams(), record_id=Path(record).stem)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "near_miss.svg").write_text(bundle.images[0], encoding="utf-8")
    (out / "violation.svg").write_text(bundle.images[1], encoding="utf-8")
    (out / "bundle.json").write_text(bundle_to_json(bundle), encoding="utf-8")
    click.echo(f"wrote {out / 'bundle.json'}")


@main.command()
@click.option("--record", type=click.Path(exists=True), default=None)
@click.option("--scenario", default=None)
@click.option("--scenario-file", type=click.Path(exists=True), default=None)
@click.option("--spec", default=None, help="Defaults to the scenario's"
                                           " paired spec.")
@click.option("--delta", type=float, default=15.0, show_default=True)
@click.option("--n", type=int, default=20, show_default=True)
@click.option("--backend", type=click.Choice(["mock", "live"]), default=None)
@click.option("--model", default=None)
@click.option("--endpoint", default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="runs",
              show_default=True)
@click.pass_context
def repair(ctx, record, scenario, scenario_file, spec, delta, n, backend,
           model, endpoint, seed, out_dir):
    """Run the whole pipeline and report per-candidate replay verdicts."""
    if spec is None and scenario in PAIRED_SPECS:
        spec = PAIRED_SPECS[scenario]
    if spec is None:
        raise click.ClickException("--spec is required (no paired default)")
    cfg = PipelineConfig(
        spec=spec, record=record, scenario=scenario,
        scenario_file=scenario_file, delta=delta, n=n, base_seed=seed,
        out_dir=out_dir, backend=_backend_config(ctx, backend, model, endpoint))
    report = cmd_repair(cfg)

    click.echo(json.dumps({k: report[k] for k in
                           ("status", "spec", "fix_rate", "total_cost_usd")},
                          indent=2))
    if "run_dir" in report:
        click.echo(f"artifacts: {report['run_dir']}")
    if report["status"] == "unfixed":
        sys.exit(2)


@main.command("sweep-delta")
@click.option("--record", type=click.Path(exists=True), default=None)
@click.option("--scenario", default=None)
@click.option("--scenario-file", type=click.Path(exists=True), default=None)
@click.option("--spec", default=None)
@click.option("--deltas", default="1,5,10,15,20,25,30", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def sweep_delta(ctx, record, scenario, scenario_file, spec, deltas, seed):
    """Near-miss step and mock fix verdict across thresholds."""
    if spec is None and scenario in PAIRED_SPECS:
        spec = PAIRED_SPECS[scenario]
    if spec is None:
        raise click.ClickException("--spec is required (no paired default)")
    values = [float(d) for d in deltas.split(",") if d.strip()]
    cfg = PipelineConfig(spec=spec, record=record, scenario=scenario,
                         scenario_file=scenario_file, base_seed=seed,
                         backend=_backend_config(ctx, None, None, None))
    table = cmd_sweep_delta(cfg, values)
    click.echo(json.dumps(table, indent=2))


@main.group()
def sim():
    """Scenario simulator."""


@sim.command("list")
def sim_list():
    for script in benchmark_suite() + [scenario_by_id("empty")]:
        paired = PAIRED_SPECS.get(script.id, "-")
        click.echo(f"{script.id:6s} [{paired}] {script.description}")


@sim.command("run")
@click.option("--scenario", default=None)
@click.option("--scenario-file", type=click.Path(exists=True), default=None)
@click.option("--repair", "repair_file", type=click.Path(exists=True),
              default=None, help="Apply a repair program during the run.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the record as JSONL.")
@click.option("--metrics", "show_metrics", is_flag=True)
def sim_run(scenario, scenario_file, repair_file, out_path, show_metrics):
    """Replay one scenario, optionally under a repair program."""
    if scenario_file:
        script = load_script(scenario_file)
    elif scenario:
        script = scenario_by_id(scenario)
    else:
        raise click.ClickException("need --scenario or --scenario-file")
    program = None
    if repair_file:
        program = parse_program(Path(repair_file).read_text(encoding="utf-8"))
        problems = validate(program)
        if problems:
            raise click.ClickException(
                "repair program is invalid:\n"
                + "\n".join(str(p) for p in problems))
    frames, outcome = run_scenario(script, program)
    summary = {"scenario": script.id, "outcome": outcome,
               "frames": len(frames)}
    if show_metrics:
        summary["metrics"] = evaluate_trace(frames)
    if out_path:
        save_record(frames, out_path)
        summary["record"] = out_path
    click.echo(json.dumps(summary, indent=2))


@main.group("mudrive")
def mudrive_group():
    """Rule-program tooling."""


@mudrive_group.command("check")
@click.argument("file", type=click.Path(exists=True))
def mudrive_check(file):
    """Parse and validate a .mud program."""
    try:
        program = parse_program(Path(file).read_text(encoding="utf-8"))
    except MuDriveSyntaxError as exc:
        raise click.ClickException(f"syntax error: {exc}")
    problems = validate(program)
    if problems:
        for p in problems:
            click.echo(str(p), err=True)
        sys.exit(1)
    click.echo(f"ok: {len(program.rules)} rule(s)")


@mudrive_group.command("schema")
@click.option("--out", "out_path", type=click.Path(), default=None)
def mudrive_schema(out_path):
    """Emit the JSON Schema used to constrain generation."""
    text = schema_json()
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text)


@main.command()
@click.option("--run", "run_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
def report(run_dir):
    """Summarize a previous pipeline run."""
    path = Path(run_dir) / "report.json"
    if not path.exists():
        raise click.ClickException(f"{path} not found")
    doc = json.loads(path.read_text(encoding="utf-8"))
    lines = [
        f"record: {doc['record_id']}  spec: {doc['spec']}  status: {doc['status']}",
        f"baseline rho: {doc['baseline']['rho_spec']:.3f}",
    ]
    if doc.get("moments"):
        m = doc["moments"]
        lines.append(f"violation step {m['violation_step']},"
                     f" near miss step {m['near_miss_step']},"
                     f" gap {m['gap_seconds']} s")
    for cand in doc.get("candidates", []):
        verdict = "-"
        if cand["replay"] is not None:
            verdict = ("fixed" if cand["replay"]["fixed"] else
                       f"not fixed ({cand['replay']['outcome']})")
        lines.append(f"  cand {cand['index']} (seed {cand['seed']}):"
                     f" ${cand['cost_usd']:.4f}  {verdict}")
    if doc.get("fix_rate") is not None:
        lines.append(f"fix rate: {doc['fix_rate']:.2f}"
                     f"  total cost: ${doc['total_cost_usd']:.4f}")
    click.echo("\n".join(lines))


@main.command()
def specs():
    """List the built-in specifications."""
    for entry in BUILTIN_SPEC_ENTRIES:
        click.echo(f"{entry.name:16s} {entry.stl}")


if __name__ == "__main__":
    main()
