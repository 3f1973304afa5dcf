"""End-to-end orchestration: analyze, localize, prompt, generate, replay,
report. Every stage persists its artifact under a content-addressed run
directory, so reruns with identical inputs rewrite identical bytes.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .localizer import locate
from .mudrive import PlannerParams, pretty_print, validate
from .promptgen import build_prompt, bundle_to_json
from .repair_llm import BackendConfig, batch_generate, make_backend
from .simulator import (
    PAIRED_SPECS,
    evaluate_trace,
    load_script,
    run_scenario,
    scenario_by_id,
)
from .spec_lang import builtin_specs, parse_spec, resolve_spec, robustness
from .trace_model import build_trace, frame_to_dict, load_record, save_record

REPORT_VERSION = 1

NO_COLLISION = "no_collision"


class PipelineError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    spec: str                             # built-in name or spec-file path
    record: str | None = None             # existing record to analyze
    scenario: str | None = None           # scenario id for baseline + replays
    scenario_file: str | None = None      # scenario JSON instead of an id
    delta: float = 15.0
    n: int = 20
    base_seed: int = 0
    out_dir: str = "runs"
    backend: BackendConfig = field(default_factory=BackendConfig)
    params: PlannerParams = field(default_factory=PlannerParams)

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (self.record or self.scenario or self.scenario_file):
            raise ValueError("need a record path or a scenario")


def _resolve_script(cfg: PipelineConfig):
    if cfg.scenario_file:
        return load_script(cfg.scenario_file)
    if cfg.scenario:
        return scenario_by_id(cfg.scenario)
    return None


def _run_key(cfg: PipelineConfig, record_bytes: bytes, spec_stl: str) -> str:
    h = hashlib.sha256()
    h.update(record_bytes)
    h.update(spec_stl.encode())
    h.update(f"{cfg.delta}|{cfg.n}|{cfg.base_seed}|{cfg.backend.backend}"
             f"|{cfg.backend.model}".encode())
    return h.hexdigest()[:12]


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _json_dump(doc) -> str:
    return json.dumps(doc, indent=2)


def _prepare_record(cfg: PipelineConfig):
    """Returns (frames, record_id, script, baseline_outcome)."""
    script = _resolve_script(cfg)
    if cfg.record:
        return load_record(cfg.record), Path(cfg.record).stem, script, None
    frames, outcome = run_scenario(script, program=None, base=cfg.params)
    return frames, script.id, script, outcome


def cmd_repair(cfg: PipelineConfig) -> dict:
    """Full pipeline; always writes report.json and returns the report."""
    spec_entry = resolve_spec(cfg.spec)
    phi = parse_spec(spec_entry.stl)
    nc_phi = builtin_specs()[NO_COLLISION]

    frames, record_id, script, baseline_outcome = _prepare_record(cfg)

    record_lines = "".join(
        json.dumps(frame_to_dict(f), separators=(",", ":")) + "\n"
        for f in frames)
    key = _run_key(cfg, record_lines.encode(), spec_entry.stl)
    run_dir = Path(cfg.out_dir) / f"{record_id}_{key}"
    run_dir.mkdir(parents=True, exist_ok=True)
    save_record(frames, run_dir / "record.jsonl")

    trace = build_trace(frames)
    rho_before = _rho(phi, trace)
    rho_nc_before = _rho(nc_phi, trace)
    baseline_metrics = evaluate_trace(frames)

    report = {
        "report_version": REPORT_VERSION,
        "record_id": record_id,
        "scenario": script.id if script else None,
        "spec": spec_entry.name,
        "spec_stl": spec_entry.stl,
        "delta": cfg.delta,
        "backend": cfg.backend.backend,
        "n": cfg.n,
        "baseline": {
            "outcome": baseline_outcome,
            "rho_spec": rho_before,
            "rho_no_collision": rho_nc_before,
            "metrics": baseline_metrics,
        },
        "notes": [],
    }

    if rho_before > 0:
        report["status"] = "no_violation"
        report["candidates"] = []
        report["fix_rate"] = None
        report["total_cost_usd"] = 0.0
        _write(run_dir / "report.json", _json_dump(report))
        return report

    moments = locate(phi, trace, cfg.delta)
    if not moments.located:
        raise PipelineError("trace violates the spec but no moments were"
                            " located; cannot continue")
    rhos = moments.prefix_rho
    if any(b > a for a, b in zip(rhos, rhos[1:])):
        report["notes"].append(
            "prefix robustness is non-monotone for this spec; the reported"
            " moments are the first crossings")

    bundle = build_prompt(moments, frames, spec_entry.name, spec_entry.prose,
                          cfg.params, record_id=record_id)
    _write(run_dir / "prompt" / "near_miss.svg", bundle.images[0])
    _write(run_dir / "prompt" / "violation.svg", bundle.images[1])
    _write(run_dir / "prompt" / "bundle.json", bundle_to_json(bundle))
    report["moments"] = {
        "violation_step": moments.violation_step,
        "near_miss_step": moments.near_miss_step,
        "gap_seconds": bundle.meta["gap_seconds"],
        "prefix_rho": list(rhos),
    }
    report["prompt"] = {
        "bundle": "prompt/bundle.json",
        "images": ["prompt/near_miss.svg", "prompt/violation.svg"],
    }

    backend = make_backend(cfg.backend)
    batch = batch_generate(bundle, cfg.n, cfg.backend, backend=backend,
                           base_seed=cfg.base_seed)

    candidates = []
    costs = []
    fixed_count = 0
    replayable = script is not None
    for i, cand in enumerate(batch.candidates):
        cand_file = run_dir / "candidates" / f"cand_{i}.mud"
        _write(cand_file, pretty_print(cand.program))
        entry = {
            "index": i,
            "seed": cand.seed,
            "attempts": cand.attempts,
            "input_tokens": cand.input_tokens,
            "output_tokens": cand.output_tokens,
            "cost_usd": cand.cost_usd,
            "valid": not validate(cand.program),
            "program_file": f"candidates/cand_{i}.mud",
            "replay": None,
            "metrics_delta": None,
        }
        if replayable:
            rframes, routcome = run_scenario(script, cand.program, cfg.params)
            replay_path = run_dir / "replays" / f"cand_{i}.jsonl"
            replay_path.parent.mkdir(parents=True, exist_ok=True)
            save_record(rframes, replay_path)
            rtrace = build_trace(rframes)
            rho_spec = _rho(phi, rtrace)
            rho_nc = _rho(nc_phi, rtrace)
            fixed = rho_spec > 0 and rho_nc > 0
            fixed_count += fixed
            rmetrics = evaluate_trace(rframes)
            entry["replay"] = {
                "outcome": routcome,
                "rho_spec": rho_spec,
                "rho_no_collision": rho_nc,
                "fixed": fixed,
                "record": f"replays/cand_{i}.jsonl",
                "metrics": rmetrics,
            }
            entry["metrics_delta"] = {
                key: (rmetrics[key] - baseline_metrics[key])
                for key in ("avg_speed_ms", "max_speed_ms", "stop_time_s",
                            "energy_j")
            }
        candidates.append(entry)
        costs.append({"index": i, "seed": cand.seed,
                      "input_tokens": cand.input_tokens,
                      "output_tokens": cand.output_tokens,
                      "cost_usd": cand.cost_usd})

    report["candidates"] = candidates
    report["generation_failures"] = [
        {"seed": seed, "error": msg} for seed, msg in batch.failures]
    report["distinct_programs"] = batch.distinct_programs
    report["total_cost_usd"] = batch.total_cost_usd
    _write(run_dir / "costs.json", _json_dump(costs))

    if replayable:
        report["fix_rate"] = fixed_count / len(candidates) if candidates else 0.0
        report["status"] = "repaired" if fixed_count else "unfixed"
    else:
        report["fix_rate"] = None
        report["status"] = "generated"
        report["notes"].append("no scenario available; candidates were not"
                               " replay-verified")

    _write(run_dir / "report.json", _json_dump(report))
    report["run_dir"] = str(run_dir)
    return report


def cmd_sweep_delta(cfg: PipelineConfig, deltas) -> dict:
    """Near-miss step and one-candidate fix verdict per threshold."""
    if not deltas:
        raise ValueError("need at least one delta")
    spec_entry = resolve_spec(cfg.spec)
    phi = parse_spec(spec_entry.stl)
    nc_phi = builtin_specs()[NO_COLLISION]

    frames, record_id, script, _ = _prepare_record(cfg)
    trace = build_trace(frames)
    backend = make_backend(cfg.backend)

    rows = []
    for delta in deltas:
        moments = locate(phi, trace, delta)
        row = {"delta": delta,
               "near_miss_step": moments.near_miss_step,
               "violation_step": moments.violation_step,
               "fixed": None}
        if moments.located and script is not None:
            bundle = build_prompt(moments, frames, spec_entry.name,
                                  spec_entry.prose, cfg.params,
                                  record_id=record_id)
            batch = batch_generate(bundle, 1, cfg.backend, backend=backend,
                                   base_seed=cfg.base_seed)
            if batch.candidates:
                cand = batch.candidates[0]
                rframes, _ = run_scenario(script, cand.program, cfg.params)
                rtrace = build_trace(rframes)
                row["fixed"] = (_rho(phi, rtrace) > 0
                                and _rho(nc_phi, rtrace) > 0)
        rows.append(row)
    return {"record_id": record_id, "spec": spec_entry.name, "rows": rows}


def _rho(phi, trace):
    return robustness(phi, trace, 0)
