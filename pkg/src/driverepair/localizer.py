"""Locates the violation moment and the near-miss moment of a trace.

Prefix robustness at k is the robustness of the formula over the first k+1
scenes only. The violation moment is the earliest prefix whose robustness
drops to or below zero; the near-miss moment is the earliest prefix at or
below a user threshold delta. Both are found by a sequential scan from
k = 0 that stops as soon as the violation is found.

Prefix robustness need not be monotone (eventually-style obligations can
dip on a clipped prefix and recover later); the first crossing is reported
regardless, and the report carries a note to that effect.
"""
from __future__ import annotations

from dataclasses import dataclass

from .spec_lang import Formula, robustness_bounded
from .trace_model import RawRecordFrame, Trace


class MomentsNotFoundError(LookupError):
    """Raised when an operation needs moments that were not located."""


@dataclass(frozen=True)
class CriticalMoments:
    violation_step: int | None
    near_miss_step: int | None
    delta: float
    prefix_rho: tuple  # rho over prefixes k = 0 .. last step scanned

    @property
    def located(self) -> bool:
        return self.violation_step is not None and self.near_miss_step is not None


def prefix_robustness(phi: Formula, trace: Trace, k: int) -> float:
    """Robustness of phi over the prefix ending at step k (no trace copies)."""
    return robustness_bounded(phi, trace, k)


def locate(phi: Formula, trace: Trace, delta: float = 15.0) -> CriticalMoments:
    """Sequential search from k = 0 for the first near-miss and violation."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    near = viol = None
    rhos = []
    for k in range(len(trace)):
        rho = prefix_robustness(phi, trace, k)
        rhos.append(rho)
        if near is None and rho <= delta:
            near = k
        if viol is None and rho <= 0:
            viol = k
        if viol is not None:
            break
    return CriticalMoments(violation_step=viol, near_miss_step=near,
                           delta=delta, prefix_rho=tuple(rhos))


def moment_frames(moments: CriticalMoments, frames) -> tuple:
    """Raw frames nearest to each located moment plus the gap in seconds.

    Moments index trace steps; the matching frame is the one whose timestamp
    is closest to step * dt. The gap is rounded to 0.1 s.
    """
    if not moments.located:
        raise MomentsNotFoundError("both moments must be located first")
    if not frames:
        raise MomentsNotFoundError("no frames supplied")

    def nearest(step: int, dt: float) -> RawRecordFrame:
        target = frames[0].t + step * dt
        return min(frames, key=lambda f: abs(f.t - target))

    dt = _frame_dt(frames)
    near = nearest(moments.near_miss_step, dt)
    viol = nearest(moments.violation_step, dt)
    gap = round((moments.violation_step - moments.near_miss_step) * dt * 10) / 10
    return near, viol, gap


def _frame_dt(frames) -> float:
    if len(frames) < 2:
        return 0.1
    return (frames[-1].t - frames[0].t) / (len(frames) - 1)
