"""JSON Schema emission and the JSON <-> program bridge.

The schema describes exactly what the catalog allows so that a function-call
backend constrained by it can only produce structurally valid programs: one
trigger, optional conditions, at least one action, at most a single exit
trigger, encoded in that order.
"""
from __future__ import annotations

import json

import jsonschema

from .catalog import VocabularyCatalog, default_catalog
from .grammar import Call, MuDriveProgram, Rule

SCHEMA_DIALECT = "https://json-schema.org/draft/2020-12/schema"


class SchemaConversionError(ValueError):
    def __init__(self, errors):
        self.paths = [e.json_path for e in errors]
        details = "; ".join(f"{e.json_path}: {e.message}" for e in errors)
        super().__init__(f"document does not match the program schema: {details}")


def _param_schema(spec):
    if spec.type == "number":
        out = {"type": "number",
               "description": f"{spec.description} Unit: {spec.unit or 'unitless'}."}
        if spec.minimum is not None:
            out["minimum"] = spec.minimum
        if spec.maximum is not None:
            out["maximum"] = spec.maximum
        return out
    if spec.type == "enum":
        return {"type": "string", "enum": list(spec.values),
                "description": spec.description}
    return {"type": "boolean", "description": spec.description}


def _call_schema(entry, extra_properties=None):
    props = {"name": {"const": entry.name, "description": entry.description}}
    required = ["name"]
    if entry.params:
        props["args"] = {
            "type": "object",
            "properties": {p.name: _param_schema(p) for p in entry.params},
            "required": [p.name for p in entry.params],
            "additionalProperties": False,
        }
        required.append("args")
    if extra_properties:
        props.update(extra_properties)
    return {
        "type": "object",
        "description": entry.description,
        "properties": props,
        "required": required,
        "additionalProperties": False,
    }


def emit_schema(cat: VocabularyCatalog | None = None) -> dict:
    """JSON Schema (draft 2020-12) for one whole repair program."""
    cat = cat or default_catalog()
    negated = {"negated": {"type": "boolean", "default": False,
                           "description": "Invert the condition."}}

    trigger_variants = [_call_schema(e) for e in cat.events]
    trigger_variants.append({
        "type": "object",
        "description": "Evaluate the rule at every step instead of on an event.",
        "properties": {"name": {"const": "always"}},
        "required": ["name"],
        "additionalProperties": False,
    })

    return {
        "$schema": SCHEMA_DIALECT,
        "title": "driving_strategy_repair_program",
        "description": "One or more rules; each rule has a name, one trigger,"
                       " zero or more conditions, one or more actions, and at"
                       " most one exit trigger, in that order.",
        "type": "object",
        "properties": {
            "rules": {
                "type": "array",
                "minItems": 1,
                "items": {"$ref": "#/$defs/rule"},
                "description": "The rules of the program, applied in order;"
                               " later rules win parameter conflicts.",
            },
        },
        "required": ["rules"],
        "additionalProperties": False,
        "$defs": {
            "rule": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1,
                             "description": "Short human-readable description"
                                            " of what the rule does."},
                    "trigger": {"$ref": "#/$defs/event_trigger"},
                    "conditions": {
                        "type": "array",
                        "items": {"$ref": "#/$defs/condition"},
                        "description": "All conditions must hold for the rule"
                                       " to apply.",
                    },
                    "actions": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"$ref": "#/$defs/action"},
                        "description": "Parameter assignments applied while"
                                       " the rule is active.",
                    },
                    "until": {"$ref": "#/$defs/event_trigger"},
                },
                "required": ["name", "trigger", "actions"],
                "additionalProperties": False,
            },
            "event_trigger": {
                "description": "An event, or 'always' for every step.",
                "oneOf": trigger_variants,
            },
            "condition": {
                "description": "A context test, optionally negated.",
                "oneOf": [_call_schema(e, negated) for e in cat.conditions],
            },
            "action": {
                "description": "A planner-parameter assignment.",
                "oneOf": [_call_schema(e) for e in cat.actions],
            },
        },
    }


def schema_json(cat: VocabularyCatalog | None = None) -> str:
    return json.dumps(emit_schema(cat), indent=2)


_default_validator = None


def _validator_for(cat: VocabularyCatalog | None):
    global _default_validator
    if cat is None or cat is default_catalog():
        if _default_validator is None:
            _default_validator = jsonschema.Draft202012Validator(emit_schema())
        return _default_validator
    return jsonschema.Draft202012Validator(emit_schema(cat))


def _call_from_json(doc, entry) -> Call:
    args = doc.get("args", {})
    ordered = tuple(args[p.name] for p in entry.params) if entry.params else ()
    return Call(doc["name"], ordered)


def from_json(doc, cat: VocabularyCatalog | None = None) -> MuDriveProgram:
    """Build a program from a schema-valid JSON document."""
    validator = _validator_for(cat)
    cat = cat or default_catalog()
    errors = sorted(validator.iter_errors(doc), key=lambda e: e.json_path)
    if errors:
        raise SchemaConversionError(errors)

    rules = []
    for rdoc in doc["rules"]:
        trigger = _trigger_from_json(rdoc["trigger"], cat)
        conditions = tuple(
            (bool(cdoc.get("negated", False)),
             _call_from_json(cdoc, cat.condition(cdoc["name"])))
            for cdoc in rdoc.get("conditions", ())
        )
        actions = tuple(_call_from_json(adoc, cat.action(adoc["name"]))
                        for adoc in rdoc["actions"])
        until = None
        if "until" in rdoc:
            until = _trigger_from_json(rdoc["until"], cat)
        rules.append(Rule(name=rdoc["name"], trigger=trigger,
                          conditions=conditions, actions=actions, until=until))
    return MuDriveProgram(tuple(rules))


def _trigger_from_json(doc, cat) -> Call:
    if doc["name"] == "always":
        return Call("always")
    return _call_from_json(doc, cat.event(doc["name"]))


def _call_to_json(call: Call, entry, negated=None):
    out = {"name": call.name}
    if entry is not None and entry.params:
        out["args"] = {p.name: v for p, v in zip(entry.params, call.args)}
    if negated:
        out["negated"] = True
    return out


def to_json(program: MuDriveProgram, cat: VocabularyCatalog | None = None) -> dict:
    """Serialize a program into the schema's JSON shape."""
    cat = cat or default_catalog()
    rules = []
    for rule in program.rules:
        rdoc = {
            "name": rule.name,
            "trigger": _call_to_json(rule.trigger, cat.event(rule.trigger.name)),
        }
        if rule.conditions:
            rdoc["conditions"] = [
                _call_to_json(call, cat.condition(call.name), negated)
                for negated, call in rule.conditions
            ]
        rdoc["actions"] = [_call_to_json(call, cat.action(call.name))
                           for call in rule.actions]
        if rule.until is not None:
            rdoc["until"] = _call_to_json(rule.until, cat.event(rule.until.name))
        rules.append(rdoc)
    return {"rules": rules}
