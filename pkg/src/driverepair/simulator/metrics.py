"""Trajectory metrics over a recorded run."""
from __future__ import annotations

from ..trace_model import STOPPED_KMH, scene_from_frame

VEHICLE_MASS_KG = 1500.0


def evaluate_trace(frames) -> dict:
    """Speed, acceleration, obstacle distance, stop time, and energy metrics.

    Speeds are reported in m/s. Energy is the telescoping sum of kinetic
    deltas, 0.5 * m * (v[t+1]^2 - v[t]^2) over consecutive steps; the
    positive-delta variant keeps only accelerating steps.
    """
    if not frames:
        raise ValueError("no frames to evaluate")

    speeds = [f.ego.speed / 3.6 for f in frames]
    accels = [abs(f.ego.accel) for f in frames]
    dt = ((frames[-1].t - frames[0].t) / (len(frames) - 1)
          if len(frames) > 1 else 0.1)

    seps = []
    for frame in frames:
        if frame.obstacles:
            seps.append(scene_from_frame(frame).nearest_npc_sep)

    energy = 0.0
    energy_positive = 0.0
    for v0, v1 in zip(speeds, speeds[1:]):
        delta = 0.5 * VEHICLE_MASS_KG * (v1 * v1 - v0 * v0)
        energy += delta
        if delta > 0:
            energy_positive += delta

    stop_time = sum(dt for f in frames if f.ego.speed < STOPPED_KMH)

    return {
        "avg_speed_ms": sum(speeds) / len(speeds),
        "max_speed_ms": max(speeds),
        "avg_accel_ms2": sum(accels) / len(accels),
        "max_accel_ms2": max(accels),
        "avg_obstacle_dist_m": (sum(seps) / len(seps)) if seps else None,
        "min_obstacle_dist_m": min(seps) if seps else None,
        "stop_time_s": stop_time,
        "energy_j": energy,
        "energy_positive_j": energy_positive,
    }
