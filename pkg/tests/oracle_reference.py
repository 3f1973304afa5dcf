"""Direct recursive robustness evaluator, transcribed from the definition.

Scalar recursion with explicit loops and no numpy, kept deliberately apart
from the vectorized production evaluator so each can check the other.
"""
from __future__ import annotations

import math

from driverepair.spec_lang import (
    Always,
    And,
    BoolLit,
    Eventually,
    Next,
    Not,
    Or,
    PredAtom,
    Prop,
    Until,
)
from driverepair.trace_model import var_margin, var_numeric

INF = math.inf


def _prop_margin(node: Prop, scene) -> float:
    f = node.expr.const
    for coef, var in node.expr.terms:
        f += coef * var_numeric(scene, var)
    if node.cmp in (">", ">="):
        return f
    if node.cmp in ("<", "<="):
        return -f
    if node.cmp == "!=":
        return abs(f)
    return -abs(f)  # ==


def rho_ref(phi, trace, t: int = 0, end: int | None = None) -> float:
    if end is None:
        end = len(trace) - 1

    if isinstance(phi, Prop):
        return _prop_margin(phi, trace.scenes[t])
    if isinstance(phi, PredAtom):
        return var_margin(trace.scenes[t], phi.var)
    if isinstance(phi, BoolLit):
        return INF if phi.value else -INF
    if isinstance(phi, Not):
        return -rho_ref(phi.child, trace, t, end)
    if isinstance(phi, And):
        return min(rho_ref(phi.left, trace, t, end),
                   rho_ref(phi.right, trace, t, end))
    if isinstance(phi, Or):
        return max(rho_ref(phi.left, trace, t, end),
                   rho_ref(phi.right, trace, t, end))
    if isinstance(phi, Next):
        if t + 1 > end:
            return INF
        return rho_ref(phi.child, trace, t + 1, end)
    if isinstance(phi, (Always, Eventually)):
        lo = int(phi.lo)
        hi = end if phi.hi == INF else min(int(phi.hi) + t, end)
        values = [rho_ref(phi.child, trace, u, end)
                  for u in range(t + lo, hi + 1)]
        if isinstance(phi, Always):
            return min(values) if values else INF
        return max(values) if values else -INF
    if isinstance(phi, Until):
        lo = int(phi.lo)
        hi = end if phi.hi == INF else min(int(phi.hi) + t, end)
        best = -INF
        for t1 in range(t + lo, hi + 1):
            left_inf = min((rho_ref(phi.left, trace, t2, end)
                            for t2 in range(t, t1 + 1)), default=INF)
            best = max(best, min(rho_ref(phi.right, trace, t1, end), left_inf))
        return best
    raise TypeError(f"unknown node {phi!r}")
