"""Repair-candidate generation through a schema-constrained tool call.

A backend receives the prompt bundle plus the program JSON schema and must
answer with tool-call arguments. Whatever comes back is parsed, converted,
and statically validated; invalid answers trigger a feedback retry. Only
validated programs leave this module.

The mock backend is fully offline and deterministic: it keys a small
template inventory on the spec name and the scene features of the near-miss
moment, and a seed picks among variants. Token counts for the mock use a
documented surrogate: ceil(characters / 4) over exactly what was sent and
received.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

from .mudrive import MuDriveProgram, from_json, validate
from .mudrive.schema import emit_schema
from .promptgen import PromptBundle

TOOL_NAME = "submit_driving_strategy_repair"


class BackendError(RuntimeError):
    """Transport-level failure talking to a backend."""


class GenerationFailedError(RuntimeError):
    def __init__(self, attempts, diagnostics):
        self.attempts = attempts
        self.diagnostics = diagnostics
        super().__init__(
            f"no valid program after {attempts} attempt(s); last diagnostics: "
            + "; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class BackendConfig:
    backend: str = "mock"                   # "mock" | "live"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4-turbo"
    api_key_env: str = "OPENAI_API_KEY"
    price_in: float = 10.0                  # USD per 1e6 input tokens
    price_out: float = 30.0                 # USD per 1e6 output tokens
    max_retries: int = 3
    temperature: float = 0.2

    def __post_init__(self):
        if self.price_in < 0 or self.price_out < 0:
            raise ValueError("token prices must be non-negative")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")


def cost_usd(input_tokens: int, output_tokens: int,
             cfg: BackendConfig | None = None) -> float:
    cfg = cfg or BackendConfig()
    return input_tokens * cfg.price_in / 1e6 + output_tokens * cfg.price_out / 1e6


@dataclass(frozen=True)
class RepairCandidate:
    program: MuDriveProgram
    raw_json: dict
    attempts: int
    input_tokens: int
    output_tokens: int
    cost_usd: float
    backend: str
    seed: int = 0


def _surrogate_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


# ---------------------------------------------------------------------------
# Mock templates
# ---------------------------------------------------------------------------

def _rule(name, trigger, conditions, actions, until=None):
    doc = {"name": name, "trigger": trigger}
    if conditions:
        doc["conditions"] = conditions
    doc["actions"] = actions
    if until is not None:
        doc["until"] = until
    return doc


def _cond(name, negated=False, **args):
    doc = {"name": name}
    if args:
        doc["args"] = args
    if negated:
        doc["negated"] = True
    return doc


def _act(name, **args):
    doc = {"name": name}
    if args:
        doc["args"] = args
    return doc


def _yield_repair(variant):
    yield_m = (60, 70, 65)[variant]
    ratio = (1.5, 2.0, 1.5)[variant]
    return {"rules": [
        _rule("Yield to crossing traffic near the junction",
              _cond("always"),
              [_cond("obstacle_distance_leq", metres=80)],
              [_act("follow_dist", metres=15), _act("yield_dist", metres=yield_m),
               _act("overtake_dist", metres=30), _act("obstacle_stop_dist", metres=10),
               _act("obstacle_decrease_ratio", ratio=ratio)]),
        _rule("Stop properly for red lights",
              _cond("always"),
              [_cond("is_traffic_light", color="red"),
               _cond("traffic_light_distance_leq", metres=60)],
              [_act("traffic_light_stop_dist", metres=40)]),
    ]}


def _stop_sign_repair(variant):
    yield_m = (60, 70, 60)[variant]
    wait_s = (4, 3, 5)[variant]
    return {"rules": [
        _rule("Hold at the stop sign until crossing traffic clears",
              _cond("approaching_stop_sign"),
              [_cond("obstacle_distance_leq", metres=150)],
              [_act("yield_dist", metres=yield_m),
               _act("stop_sign_wait", seconds=wait_s),
               _act("obstacle_decrease_ratio", ratio=1.5)],
              until=_cond("exiting_junction")),
    ]}


def _emergency_brake_repair(variant):
    return {"rules": [
        _rule("Brake hard when anything is close ahead",
              _cond("always"),
              [_cond("obstacle_distance_leq", metres=15)],
              [_act("obstacle_stop_dist", metres=12),
               _act("obstacle_decrease_ratio", ratio=2.0)]),
    ]}


def _generic_caution_repair(variant):
    return {"rules": [
        _rule("Drive a little slower overall",
              _cond("always"),
              [_cond("speed_gt", kmh=40)],
              [_act("cruise_speed", kmh=45)]),
    ]}


def _light_caution_repair(colors, variant):
    cruise = (25, 20, 25)[variant]
    engage = (70, 80, 75)[variant]
    rules = [
        _rule("Approach traffic lights slowly",
              _cond("always"),
              [_cond("traffic_light_distance_leq", metres=80)],
              [_act("cruise_speed", kmh=cruise)]),
    ]
    for color in colors:
        rules.append(
            _rule(f"Brake early for {color} lights",
                  _cond("always"),
                  [_cond("is_traffic_light", color=color),
                   _cond("traffic_light_distance_leq", metres=engage)],
                  [_act("traffic_light_stop_dist", metres=engage)]))
    return {"rules": rules}


def _borrow_repair(variant):
    overtake = (30, 25, 35)[variant]
    return {"rules": [
        _rule("Borrow the neighbour lane to pass a blocked stretch",
              _cond("always"),
              [_cond("front_vehicle_closer_than", metres=20)],
              [_act("enable_lane_borrow", enabled=True),
               _act("overtake_dist", metres=overtake),
               _act("follow_dist", metres=10)]),
    ]}


def _weather_repair(features, variant):
    cruise = (30, 25, 28)[variant]
    weather = features.get("weather", {})
    for kind in ("fog", "rain", "snow"):
        if weather.get(kind):
            cond = _cond("is_weather", kind=kind)
            break
    else:
        cond = _cond("visibility_leq", metres=50)
    return {"rules": [
        _rule("Slow down in bad weather",
              _cond("always"), [cond], [_act("cruise_speed", kmh=cruise)]),
    ]}


def _congestion_repair(variant):
    return {"rules": [
        _rule("Wait outside a congested junction",
              _cond("always"),
              [_cond("junction_congested"), _cond("in_junction", negated=True)],
              [_act("cruise_speed", kmh=0)]),
    ]}


def _select_template(spec_name: str, features: dict, variant: int) -> dict:
    if spec_name == "no_collision":
        band = features.get("obstacle_band", "mid")
        if band == "near":
            return _emergency_brake_repair(variant)
        if band == "far":
            return _generic_caution_repair(variant)
        if features.get("in_junction"):
            return _stop_sign_repair(variant)
        return _yield_repair(variant)
    if spec_name == "law38_red":
        return _light_caution_repair(("red",), variant)
    if spec_name == "law38_yellow":
        return _light_caution_repair(("yellow", "red"), variant)
    if spec_name == "law46":
        return _weather_repair(features, variant)
    if spec_name == "law53":
        return _congestion_repair(variant)
    if spec_name in ("law44", "finish_journey"):
        return _borrow_repair(variant)
    return _generic_caution_repair(variant)


class MockBackend:
    """Offline deterministic backend: same bundle and seed, same bytes."""

    name = "mock"
    VARIANTS = 3

    def complete(self, bundle: PromptBundle, schema: dict, seed: int,
                 feedback=()):
        features = bundle.meta.get("features", {})
        spec_name = bundle.meta.get("spec_name", "")
        doc = _select_template(spec_name, features, seed % self.VARIANTS)
        raw = json.dumps(doc, separators=(", ", ": "), sort_keys=False)
        # surrogate accounting: 4 characters per token over everything sent
        sent = (bundle.text + "".join(bundle.images) + "".join(feedback)
                + json.dumps(schema))
        usage = (_surrogate_tokens(sent), _surrogate_tokens(raw))
        return raw, usage


class LiveBackend:
    """Chat-completions client with a forced tool call.

    Images are rasterized to PNG when a rasterizer is importable; otherwise
    the SVG sources are inlined as text parts so the request stays valid.
    """

    name = "live"

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        key = os.environ.get(cfg.api_key_env, "")
        if not key:
            raise BackendError(f"set {cfg.api_key_env} to use the live backend")
        self._key = key

    def _image_parts(self, bundle):
        try:
            import base64

            import cairosvg  # optional; not needed for the mock path

            parts = []
            for svg in bundle.images:
                png = cairosvg.svg2png(bytestring=svg.encode("utf-8"))
                b64 = base64.b64encode(png).decode("ascii")
                parts.append({"type": "image_url",
                              "image_url": {"url": f"data:image/png;base64,{b64}"}})
            return parts
        except ImportError:
            return [{"type": "text", "text": f"[image {i + 1} as SVG]\n{svg}"}
                    for i, svg in enumerate(bundle.images)]

    def complete(self, bundle: PromptBundle, schema: dict, seed: int,
                 feedback=()):
        import requests

        content = self._image_parts(bundle)
        content.append({"type": "text", "text": bundle.text})
        messages = [{"role": "user", "content": content}]
        for msg in feedback:
            messages.append({"role": "user", "content": msg})
        payload = {
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "seed": seed,
            "messages": messages,
            "tools": [{
                "type": "function",
                "function": {"name": TOOL_NAME,
                             "description": "Submit one driving strategy repair"
                                            " program.",
                             "parameters": schema},
            }],
            "tool_choice": {"type": "function", "function": {"name": TOOL_NAME}},
        }
        try:
            resp = requests.post(
                self.cfg.endpoint,
                headers={"Authorization": f"Bearer {self._key}"},
                json=payload, timeout=120)
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise BackendError(f"backend request failed: {exc}") from exc
        body = resp.json()
        try:
            raw = body["choices"][0]["message"]["tool_calls"][0]["function"]["arguments"]
            usage = (int(body["usage"]["prompt_tokens"]),
                     int(body["usage"]["completion_tokens"]))
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected backend response shape: {exc}") from exc
        return raw, usage


def make_backend(cfg: BackendConfig):
    if cfg.backend == "mock":
        return MockBackend()
    if cfg.backend == "live":
        return LiveBackend(cfg)
    raise ValueError(f"unknown backend {cfg.backend!r}")


# ---------------------------------------------------------------------------
# Generation with validation retries
# ---------------------------------------------------------------------------

def generate_repair(bundle: PromptBundle, cfg: BackendConfig | None = None,
                    backend=None, seed: int = 0) -> RepairCandidate:
    """Query the backend until a program validates cleanly, or fail."""
    cfg = cfg or BackendConfig()
    backend = backend or make_backend(cfg)
    schema = emit_schema()

    feedback: list[str] = []
    total_in = total_out = 0
    last_diags = []
    for attempt in range(1, cfg.max_retries + 1):
        raw, (tok_in, tok_out) = backend.complete(bundle, schema, seed,
                                                  tuple(feedback))
        total_in += tok_in
        total_out += tok_out
        try:
            doc = json.loads(raw)
            program = from_json(doc)
            diags = validate(program)
        except (ValueError, KeyError) as exc:
            diags = [exc]
            doc = None
            program = None
        if program is not None and not diags:
            return RepairCandidate(
                program=program, raw_json=doc, attempts=attempt,
                input_tokens=total_in, output_tokens=total_out,
                cost_usd=cost_usd(total_in, total_out, cfg),
                backend=getattr(backend, "name", cfg.backend), seed=seed)
        last_diags = diags
        feedback.append(
            "The previous program was invalid: "
            + "; ".join(str(d) for d in diags)
            + ". Return a corrected program through the same function call.")
    raise GenerationFailedError(cfg.max_retries, last_diags)


@dataclass
class BatchResult:
    candidates: list = field(default_factory=list)
    failures: list = field(default_factory=list)   # (seed, message)

    @property
    def distinct_programs(self) -> int:
        return len({c.program for c in self.candidates})

    @property
    def total_cost_usd(self) -> float:
        return sum(c.cost_usd for c in self.candidates)


def batch_generate(bundle: PromptBundle, n: int,
                   cfg: BackendConfig | None = None, backend=None,
                   base_seed: int = 0) -> BatchResult:
    """n independent candidates; per-slot failures do not abort the batch."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cfg = cfg or BackendConfig()
    backend = backend or make_backend(cfg)
    result = BatchResult()
    for i in range(n):
        seed = base_seed + i
        try:
            result.candidates.append(
                generate_repair(bundle, cfg, backend=backend, seed=seed))
        except (GenerationFailedError, BackendError) as exc:
            result.failures.append((seed, str(exc)))
    return result
