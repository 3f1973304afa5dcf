"""Temporal property language over traces: parser and quantitative semantics.

Formulas combine comparisons of linear expressions over signal variables
with boolean connectives and the temporal operators always / eventually /
until / next, each optionally bounded by a step interval [l,u]. Evaluation
yields a robustness degree: positive means satisfied, <= 0 means violated.

Atomic robustness follows the usual sign conventions. For a comparison the
linear expression f = lhs - rhs gives +f for > and >=, -f for < and <=,
|f| for != and -|f| for ==. Bare catalog predicates contribute their
satisfaction margin. Temporal windows are clipped to the trace: an empty
window makes eventually -infinity and always +infinity, and next at the
final step is vacuously +infinity.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .trace_model import (
    CatalogError,
    SignalVar,
    Trace,
    catalog_kind,
    enum_code,
    var_margin,
    var_numeric,
)

INF = math.inf
COMPARATORS = (">=", "<=", "==", "!=", ">", "<")


class SpecSyntaxError(ValueError):
    def __init__(self, msg, pos=None):
        super().__init__(msg if pos is None else f"{msg} (at position {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinExpr:
    """Linear combination of numeric signal variables plus a constant."""
    terms: tuple  # ((coef, SignalVar), ...)
    const: float = 0.0

    def minus(self, other: "LinExpr") -> "LinExpr":
        return LinExpr(self.terms + tuple((-c, v) for c, v in other.terms),
                       self.const - other.const)


@dataclass(frozen=True)
class Prop:
    expr: LinExpr
    cmp: str


@dataclass(frozen=True)
class PredAtom:
    var: SignalVar


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Next:
    child: "Formula"


@dataclass(frozen=True)
class Always:
    lo: float
    hi: float
    child: "Formula"


@dataclass(frozen=True)
class Eventually:
    lo: float
    hi: float
    child: "Formula"


@dataclass(frozen=True)
class Until:
    lo: float
    hi: float
    left: "Formula"
    right: "Formula"


Formula = object  # union of the node classes above


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|>=|<=|==|!=|[><!&|()\[\],*+-])
  | (?P<ws>\s+)
""", re.VERBOSE)

_KEYWORDS = {"G", "always", "F", "eventually", "U", "until", "X", "next",
             "true", "false", "inf"}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise SpecSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def at(self, value):
        return self.peek()[1] == value

    # formula := or_expr ('->' formula)?   (implication is sugar for !a | b)
    def formula(self):
        left = self.or_expr()
        if self.at("->"):
            self.next()
            right = self.formula()
            return Or(Not(left), right)
        return left

    def or_expr(self):
        node = self.and_expr()
        while self.at("|"):
            self.next()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self):
        node = self.until_expr()
        while self.at("&"):
            self.next()
            node = And(node, self.until_expr())
        return node

    def until_expr(self):
        node = self.unary()
        while self.peek()[1] in ("U", "until"):
            self.next()
            lo, hi = self.maybe_interval()
            node = Until(lo, hi, node, self.unary())
        return node

    def unary(self):
        kind, val, pos = self.peek()
        if val == "!":
            self.next()
            return Not(self.unary())
        if val in ("G", "always"):
            self.next()
            lo, hi = self.maybe_interval()
            return Always(lo, hi, self.unary())
        if val in ("F", "eventually"):
            self.next()
            lo, hi = self.maybe_interval()
            return Eventually(lo, hi, self.unary())
        if val in ("X", "next"):
            self.next()
            return Next(self.unary())
        return self.primary()

    def maybe_interval(self):
        if not self.at("["):
            return 0.0, INF
        self.next()
        lo = self.number()
        self.expect(",")
        if self.at("inf"):
            self.next()
            hi = INF
        else:
            hi = self.number()
        self.expect("]")
        if lo < 0 or lo > hi:
            raise SpecSyntaxError(f"malformed interval [{lo},{hi}]")
        return lo, hi

    def number(self):
        kind, val, pos = self.next()
        sign = 1.0
        if val == "-":
            sign = -1.0
            kind, val, pos = self.next()
        if kind != "num":
            raise SpecSyntaxError(f"expected a number, found {val!r}", pos)
        return sign * float(val)

    def primary(self):
        kind, val, pos = self.peek()
        if val == "(":
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        if val == "true":
            self.next()
            return BoolLit(True)
        if val == "false":
            self.next()
            return BoolLit(False)
        return self.atom()

    # atom := linexpr (cmp linexpr)? ; a lone term must be a boolean variable
    def atom(self):
        start = self.peek()[2]
        lhs = self.linexpr()
        if self.peek()[1] in COMPARATORS:
            cmp = self.next()[1]
            rhs = self.linexpr(enum_partner=lhs)
            return self._comparison(lhs, rhs, cmp, start)
        if len(lhs.terms) == 1 and lhs.const == 0.0 and lhs.terms[0][0] == 1.0:
            var = lhs.terms[0][1]
            if catalog_kind(var.name) in ("bool", "pred"):
                return PredAtom(var)
            raise SpecSyntaxError(
                f"{var.name} is numeric; compare it (e.g. {var.name} < 60)", start)
        raise SpecSyntaxError("expected a comparison", start)

    def _comparison(self, lhs, rhs, cmp, pos):
        for _, var in lhs.terms + rhs.terms:
            kind = catalog_kind(var.name)
            if kind in ("bool", "pred"):
                raise SpecSyntaxError(
                    f"{var.name} is a proposition and cannot appear in arithmetic", pos)
        return Prop(lhs.minus(rhs), cmp)

    def linexpr(self, enum_partner=None):
        terms = []
        const = 0.0
        sign = 1.0
        while True:
            kind, val, pos = self.peek()
            if val == "-":
                self.next()
                sign = -sign
                continue
            if val == "+":
                self.next()
                continue
            if kind == "num":
                self.next()
                coef = sign * float(val)
                if self.at("*"):
                    self.next()
                    terms.append((coef, self.variable()))
                else:
                    const += coef
            elif kind == "name" and val not in _KEYWORDS:
                name = val
                enum_value = self._try_enum_literal(name, enum_partner)
                if enum_value is not None:
                    self.next()
                    const += sign * enum_value
                else:
                    terms.append((sign, self.variable()))
            else:
                raise SpecSyntaxError(f"expected a variable or number, found {val!r}", pos)
            sign = 1.0
            nxt = self.peek()[1]
            if nxt in ("+", "-"):
                if nxt == "+":
                    self.next()
                else:
                    self.next()
                    sign = -1.0
                continue
            break
        return LinExpr(tuple(terms), const)

    def _try_enum_literal(self, name, partner):
        """Resolve bare names like `red` against an enum variable on the lhs."""
        if partner is None or len(partner.terms) != 1:
            return None
        pvar = partner.terms[0][1]
        if catalog_kind(pvar.name) != "enum":
            return None
        try:
            return enum_code(pvar.name, name)
        except CatalogError:
            return None

    def variable(self):
        kind, val, pos = self.next()
        if kind != "name" or val in _KEYWORDS:
            raise SpecSyntaxError(f"expected a variable name, found {val!r}", pos)
        arg = None
        if self.at("("):
            self.next()
            arg = self.number()
            self.expect(")")
        var = SignalVar(val, arg)
        catalog_kind(val)  # raises CatalogError for unknown names
        needs = catalog_kind(val) == "pred"
        if needs and arg is None:
            raise SpecSyntaxError(f"{val} requires a parameter, e.g. {val}(10)", pos)
        if not needs and arg is not None:
            raise SpecSyntaxError(f"{val} does not take a parameter", pos)
        return var


def parse_spec(text: str) -> Formula:
    parser = _Parser(text)
    node = parser.formula()
    kind, val, pos = parser.peek()
    if kind != "eof":
        raise SpecSyntaxError(f"unexpected trailing input {val!r}", pos)
    return node


# ---------------------------------------------------------------------------
# Quantitative semantics
# ---------------------------------------------------------------------------

def _signal_array(trace: Trace, var: SignalVar) -> np.ndarray:
    key = ("num", var)
    arr = trace._signal_cache.get(key)
    if arr is None:
        arr = np.array([var_numeric(sc, var) for sc in trace.scenes], dtype=float)
        trace._signal_cache[key] = arr
    return arr


def _margin_array(trace: Trace, var: SignalVar) -> np.ndarray:
    key = ("margin", var)
    arr = trace._signal_cache.get(key)
    if arr is None:
        arr = np.array([var_margin(sc, var) for sc in trace.scenes], dtype=float)
        trace._signal_cache[key] = arr
    return arr


def _prop_array(trace: Trace, node: Prop) -> np.ndarray:
    key = ("prop", node)
    arr = trace._signal_cache.get(key)
    if arr is None:
        f = np.full(len(trace), node.expr.const, dtype=float)
        for coef, var in node.expr.terms:
            f = f + coef * _signal_array(trace, var)
        if node.cmp in (">", ">="):
            arr = f
        elif node.cmp in ("<", "<="):
            arr = -f
        elif node.cmp == "!=":
            arr = np.abs(f)
        else:  # ==
            arr = -np.abs(f)
        trace._signal_cache[key] = arr
    return arr


def _window_agg(child: np.ndarray, lo, hi, end: int, is_min: bool) -> np.ndarray:
    """out[t] = agg(child[t+lo : min(t+hi, end)+1]), empty windows vacuous."""
    ident = INF if is_min else -INF
    lo_i = int(lo)
    n = end + 1
    if math.isinf(hi):
        acc = np.minimum.accumulate if is_min else np.maximum.accumulate
        suffix = acc(child[::-1])[::-1]
        out = np.full(n, ident)
        if lo_i <= end:
            out[: n - lo_i] = suffix[lo_i:]
        return out
    hi_i = int(hi)
    w = hi_i - lo_i + 1
    padded = np.full(n + lo_i + w, ident)
    padded[:n] = child
    windows = np.lib.stride_tricks.sliding_window_view(padded, w)
    vals = windows.min(axis=1) if is_min else windows.max(axis=1)
    return vals[lo_i: lo_i + n]


def _eval(node, trace: Trace, end: int, memo: dict) -> np.ndarray:
    """Robustness of `node` at every t in [0, end], trace clipped at `end`."""
    key = (id(node), end)
    cached = memo.get(key)
    if cached is not None:
        return cached

    if isinstance(node, Prop):
        out = _prop_array(trace, node)[: end + 1]
    elif isinstance(node, PredAtom):
        out = _margin_array(trace, node.var)[: end + 1]
    elif isinstance(node, BoolLit):
        out = np.full(end + 1, INF if node.value else -INF)
    elif isinstance(node, Not):
        out = -_eval(node.child, trace, end, memo)
    elif isinstance(node, And):
        out = np.minimum(_eval(node.left, trace, end, memo),
                         _eval(node.right, trace, end, memo))
    elif isinstance(node, Or):
        out = np.maximum(_eval(node.left, trace, end, memo),
                         _eval(node.right, trace, end, memo))
    elif isinstance(node, Next):
        child = _eval(node.child, trace, end, memo)
        out = np.append(child[1:], INF)
    elif isinstance(node, Always):
        out = _window_agg(_eval(node.child, trace, end, memo),
                          node.lo, node.hi, end, is_min=True)
    elif isinstance(node, Eventually):
        out = _window_agg(_eval(node.child, trace, end, memo),
                          node.lo, node.hi, end, is_min=False)
    elif isinstance(node, Until):
        c1 = _eval(node.left, trace, end, memo)
        c2 = _eval(node.right, trace, end, memo)
        out = np.full(end + 1, -INF)
        lo_i = int(node.lo)
        for t in range(end + 1):
            hi_t = end if math.isinf(node.hi) else min(int(node.hi) + t, end)
            run = INF
            best = -INF
            for t1 in range(t, hi_t + 1):
                run = min(run, c1[t1])
                if t1 >= t + lo_i:
                    best = max(best, min(c2[t1], run))
            out[t] = best
    else:
        raise TypeError(f"not a formula node: {node!r}")

    memo[key] = out
    return out


def robustness(phi: Formula, trace: Trace, t: int = 0) -> float:
    """Robustness degree of phi over the trace, evaluated at step t."""
    if not 0 <= t < len(trace):
        raise IndexError(f"step {t} outside trace of length {len(trace)}")
    return float(_eval(phi, trace, len(trace) - 1, {})[t]) + 0.0


def robustness_bounded(phi: Formula, trace: Trace, end: int) -> float:
    """Robustness at step 0 with evaluation clipped to scenes [0, end]."""
    if not 0 <= end < len(trace):
        raise IndexError(f"step {end} outside trace of length {len(trace)}")
    return float(_eval(phi, trace, end, {})[0]) + 0.0


def satisfies(phi: Formula, trace: Trace) -> bool:
    return robustness(phi, trace, 0) > 0


# ---------------------------------------------------------------------------
# Built-in specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpecEntry:
    name: str
    stl: str
    prose: str


# The four numbered laws are simplified desk-scale encodings of the cited
# road regulations; window widths are chosen to be robust at a 10 Hz step.
BUILTIN_SPEC_ENTRIES = (
    SpecEntry(
        "no_collision",
        "G (!NearestNPC(0.1))",
        "Avoid collisions with other objects.",
    ),
    SpecEntry(
        "finish_journey",
        "G (F[0,200](speed > 0.5) | dest(5))",
        "Do not stop on the road; keep making progress unless close to the destination.",
    ),
    SpecEntry(
        "law38_green",
        "G ((trafficLightColor == green & stoplineAhead(3) & stopped) -> F[0,100] (!stopped))",
        "At a green light, proceed; do not remain stopped at the stop line.",
    ),
    SpecEntry(
        "law38_yellow",
        "G ((trafficLightColor == yellow & stoplineAhead(3)) -> stopped)",
        "At a yellow light, vehicles that have not yet crossed the stop line must stop.",
    ),
    SpecEntry(
        "law38_red",
        "G ((trafficLightColor == red & stoplineAhead(3)) -> stopped)",
        "At a red light, stop before the stop line and do not enter the intersection.",
    ),
    SpecEntry(
        "law44",
        "G ((laneKind == fast) -> (F[0,200] (speed > 0.5) | dest(5)))",
        "In the fast lane, keep moving; slow or stopped vehicles must leave it.",
    ),
    SpecEntry(
        "law46",
        "G ((fogIntensity > 0 | rainIntensity > 0 | snowIntensity > 0 | visibility < 50)"
        " -> (speed <= 30))",
        "Under rain, snow, or fog, or when visibility is below 50 metres,"
        " do not exceed 30 km/h.",
    ),
    SpecEntry(
        "law53",
        "G ((junctionAhead(1) & junctionCongested) -> !inJunction)",
        "Do not enter a congested junction; wait outside until it clears.",
    ),
)

_BUILTINS = {entry.name: entry for entry in BUILTIN_SPEC_ENTRIES}


def builtin_specs() -> dict:
    """Name to parsed formula for every built-in specification."""
    return {name: parse_spec(entry.stl) for name, entry in _BUILTINS.items()}


def builtin_spec_entry(name: str) -> SpecEntry:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise KeyError(f"no built-in specification named {name!r}") from None


def load_spec_file(path) -> dict:
    """Parse a spec file: stanzas of `name:` / `stl:` / optional `prose:` lines."""
    entries = {}
    name = stl = prose = None

    def flush():
        nonlocal name, stl, prose
        if name is not None:
            if stl is None:
                raise SpecSyntaxError(f"spec {name!r} has no stl: line")
            entries[name] = SpecEntry(name, stl, prose or name)
        name = stl = prose = None

    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("name:"):
                flush()
                name = line[len("name:"):].strip()
            elif line.startswith("stl:"):
                stl = line[len("stl:"):].strip()
            elif line.startswith("prose:"):
                prose = line[len("prose:"):].strip()
            else:
                raise SpecSyntaxError(f"unexpected spec-file line: {line!r}")
    flush()
    return entries


def resolve_spec(name_or_path) -> SpecEntry:
    """Accept a built-in name or a path to a spec file with one stanza."""
    name_or_path = str(name_or_path)
    if name_or_path in _BUILTINS:
        return _BUILTINS[name_or_path]
    entries = load_spec_file(name_or_path)
    if len(entries) != 1:
        raise SpecSyntaxError(f"{name_or_path} must define exactly one spec"
                              f" (found {len(entries)})")
    return next(iter(entries.values()))
