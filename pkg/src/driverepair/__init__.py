"""Driving-trace analysis, violation localization, and strategy repair."""

__version__ = "0.1.0"

from .localizer import CriticalMoments, locate, moment_frames, prefix_robustness
from .spec_lang import builtin_specs, parse_spec, robustness, satisfies
from .trace_model import (
    RawRecordFrame,
    Scene,
    SignalVar,
    Trace,
    build_trace,
    load_record,
    save_record,
    scene_value,
)

__all__ = [
    "CriticalMoments",
    "RawRecordFrame",
    "Scene",
    "SignalVar",
    "Trace",
    "build_trace",
    "builtin_specs",
    "load_record",
    "locate",
    "moment_frames",
    "parse_spec",
    "prefix_robustness",
    "robustness",
    "satisfies",
    "save_record",
    "scene_value",
]
