"""Static validation of rule programs against the vocabulary catalog."""
from __future__ import annotations

from dataclasses import dataclass

from .catalog import VocabularyCatalog, default_catalog
from .grammar import Call, MuDriveProgram


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    where: str       # "trigger" | "condition" | "action" | "until" | "rule"
    message: str

    def __str__(self):
        return f"[{self.rule}] {self.where}: {self.message}"


def _check_args(entry, call: Call, rule, where, out):
    if len(call.args) != len(entry.params):
        out.append(Diagnostic(rule, where,
                              f"{call.name} takes {len(entry.params)} argument(s),"
                              f" got {len(call.args)}"))
        return
    for spec, value in zip(entry.params, call.args):
        if spec.type == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                out.append(Diagnostic(rule, where,
                                      f"{call.name}: {spec.name} must be a number"
                                      f" ({spec.unit or 'unitless'}), got {value!r}"))
                continue
            if spec.minimum is not None and value < spec.minimum:
                out.append(Diagnostic(rule, where,
                                      f"{call.name}: {spec.name} must be"
                                      f" >= {spec.minimum}, got {value}"))
            if spec.maximum is not None and value > spec.maximum:
                out.append(Diagnostic(rule, where,
                                      f"{call.name}: {spec.name} must be"
                                      f" <= {spec.maximum}, got {value}"))
        elif spec.type == "enum":
            if value not in spec.values:
                out.append(Diagnostic(rule, where,
                                      f"{call.name}: {spec.name} must be one of"
                                      f" {list(spec.values)}, got {value!r}"))
        elif spec.type == "bool":
            if not isinstance(value, bool):
                out.append(Diagnostic(rule, where,
                                      f"{call.name}: {spec.name} must be true or"
                                      f" false, got {value!r}"))


def _check_trigger(call: Call, cat, rule, where, out):
    if call.name == "always":
        if call.args:
            out.append(Diagnostic(rule, where, "'always' takes no arguments"))
        return
    entry = cat.event(call.name)
    if entry is None:
        out.append(Diagnostic(rule, where, f"unknown event {call.name!r}"))
        return
    _check_args(entry, call, rule, where, out)


def validate(program: MuDriveProgram, cat: VocabularyCatalog | None = None):
    """Returns a list of diagnostics; empty means the program is well formed."""
    cat = cat or default_catalog()
    out: list[Diagnostic] = []

    if not program.rules:
        out.append(Diagnostic("<program>", "rule", "program has no rules"))

    seen = set()
    for rule in program.rules:
        if rule.name in seen:
            out.append(Diagnostic(rule.name, "rule", "duplicate rule name"))
        seen.add(rule.name)

        _check_trigger(rule.trigger, cat, rule.name, "trigger", out)

        for negated, call in rule.conditions:
            entry = cat.condition(call.name)
            if entry is None:
                out.append(Diagnostic(rule.name, "condition",
                                      f"unknown condition {call.name!r}"))
                continue
            _check_args(entry, call, rule.name, "condition", out)

        if not rule.actions:
            out.append(Diagnostic(rule.name, "action", "rule has no actions"))
        for call in rule.actions:
            entry = cat.action(call.name)
            if entry is None:
                out.append(Diagnostic(rule.name, "action",
                                      f"unknown action {call.name!r}"))
                continue
            _check_args(entry, call, rule.name, "action", out)

        if rule.until is not None:
            _check_trigger(rule.until, cat, rule.name, "until", out)

    return out
