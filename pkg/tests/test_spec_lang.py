import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_scene, random_trace, speed_trace
from formula_gen import random_formula
from oracle_boolean import holds
from oracle_reference import rho_ref

from driverepair.spec_lang import (
    Always,
    And,
    BoolLit,
    Eventually,
    LinExpr,
    Not,
    Or,
    PredAtom,
    Prop,
    SpecSyntaxError,
    Until,
    builtin_spec_entry,
    builtin_specs,
    load_spec_file,
    parse_spec,
    robustness,
    satisfies,
)
from driverepair.trace_model import SignalVar, Trace


class TestParser:
    def test_speed_limit_example(self):
        phi = parse_spec("G (speed < 60)")
        assert phi == Always(0.0, math.inf,
                             Prop(LinExpr(((1.0, SignalVar("speed")),), -60.0), "<"))

    def test_no_collision_text(self):
        phi = parse_spec("G (!NearestNPC(0.1))")
        assert phi == Always(0.0, math.inf, Not(PredAtom(SignalVar("NearestNPC", 0.1))))

    def test_finish_journey_shape(self):
        phi = parse_spec("G (F[0,200](speed > 0.5) | dest(5))")
        assert isinstance(phi, Always)
        assert isinstance(phi.child, Or)
        left, right = phi.child.left, phi.child.right
        assert isinstance(left, Eventually) and (left.lo, left.hi) == (0.0, 200.0)
        assert right == PredAtom(SignalVar("dest", 5.0))

    def test_interval_omitted_means_unbounded(self):
        phi = parse_spec("F (speed > 10)")
        assert (phi.lo, phi.hi) == (0.0, math.inf)

    def test_enum_comparison(self):
        phi = parse_spec("trafficLightColor == red")
        assert isinstance(phi, Prop) and phi.cmp == "=="

    def test_implication_desugars(self):
        phi = parse_spec("stopped -> inJunction")
        assert isinstance(phi, Or) and isinstance(phi.left, Not)

    def test_until_keyword(self):
        phi = parse_spec("(speed > 1) U[0,5] stopped")
        assert isinstance(phi, Until) and (phi.lo, phi.hi) == (0.0, 5.0)

    @pytest.mark.parametrize("bad", [
        "G (speed <)",
        "G (speed < 60",
        "wibble > 3",              # unknown variable
        "F[9,5] (speed > 1)",      # l > u
        "NPCAhead > 3",            # predicate in arithmetic
        "speed",                   # numeric var used as proposition
        "G (speed < 60) trailing",
    ])
    def test_rejects(self, bad):
        with pytest.raises((SpecSyntaxError, KeyError)):
            parse_spec(bad)


class TestRobustnessExamples:
    def test_speed_limit_satisfied_margin(self):
        # max speed 50 against a 60 km/h cap leaves a margin of 10
        trace = speed_trace([0, 0.3, 10, 25, 40, 50])
        phi = parse_spec("G (speed < 60)")
        assert robustness(phi, trace, 0) == pytest.approx(10.0)
        assert satisfies(phi, trace)

    def test_ramp_violates_by_30(self):
        trace = speed_trace(range(91))
        phi = parse_spec("G (speed < 60)")
        assert robustness(phi, trace, 0) == pytest.approx(-30.0)
        assert not satisfies(phi, trace)

    def test_empty_window_eventually_is_false(self):
        trace = speed_trace([10, 10, 10])
        phi = parse_spec("F[5,9] (speed > 0)")
        assert robustness(phi, trace, 0) == -math.inf
        assert not satisfies(phi, trace)

    def test_next_vacuous_at_last_step(self):
        trace = speed_trace([10, 20])
        from driverepair.spec_lang import Next
        phi = Next(parse_spec("speed > 15"))
        assert robustness(phi, trace, 0) == pytest.approx(5.0)
        assert robustness(phi, trace, 1) == math.inf

    def test_t_out_of_range(self):
        trace = speed_trace([10])
        with pytest.raises(IndexError):
            robustness(parse_spec("speed > 0"), trace, 1)


class TestBuiltins:
    def test_names(self, specs):
        assert set(specs) == {"no_collision", "finish_journey", "law38_green",
                              "law38_yellow", "law38_red", "law44", "law46",
                              "law53"}

    def test_no_collision_matches_plain_text(self, specs):
        assert specs["no_collision"] == parse_spec("G (!NearestNPC(0.1))")

    def test_law46_flags_fog_speeding(self, specs):
        foggy_fast = Trace([make_scene(speed=45.0, fog=0.8, visibility=40.0)])
        foggy_slow = Trace([make_scene(speed=25.0, fog=0.8, visibility=40.0)])
        assert robustness(specs["law46"], foggy_fast) <= 0
        assert robustness(specs["law46"], foggy_slow) > 0

    def test_unknown_lookup_absent(self, specs):
        assert "unknown" not in specs

    def test_entry_has_prose(self):
        assert builtin_spec_entry("no_collision").prose

    def test_spec_file_roundtrip(self, tmp_path):
        path = tmp_path / "custom.spec"
        path.write_text("name: slowish\nstl: G (speed < 40)\n"
                        "prose: Keep it under 40.\n", encoding="utf-8")
        entries = load_spec_file(path)
        assert set(entries) == {"slowish"}
        assert entries["slowish"].prose == "Keep it under 40."
        parse_spec(entries["slowish"].stl)


class TestEvaluatorEquivalence:
    def test_sign_and_value_against_oracles(self):
        rng = random.Random(2024)
        for _ in range(400):
            phi = random_formula(rng, depth=3)
            trace = random_trace(rng, max_len=12)
            got = robustness(phi, trace, 0)
            ref = rho_ref(phi, trace, 0)
            assert got == pytest.approx(ref, abs=1e-9), (phi, trace.scenes)
            verdict = holds(phi, trace, 0)
            assert (got > 0) == verdict, (phi, got, verdict)

    def test_negation_flips_robustness(self):
        rng = random.Random(7)
        for _ in range(200):
            phi = random_formula(rng, depth=2)
            trace = random_trace(rng, max_len=10)
            assert robustness(Not(phi), trace, 0) == -robustness(phi, trace, 0)


@st.composite
def formula_and_trace(draw):
    seed = draw(st.integers(min_value=0, max_value=10**9))
    rng = random.Random(seed)
    return random_formula(rng, depth=2), random_trace(rng, max_len=8)


class TestAlgebraicProperties:
    @settings(max_examples=60, deadline=None)
    @given(formula_and_trace(), formula_and_trace())
    def test_de_morgan_exact(self, pair_a, pair_b):
        phi_a, trace = pair_a
        phi_b, _ = pair_b
        lhs = robustness(Not(And(phi_a, phi_b)), trace, 0)
        rhs = robustness(Or(Not(phi_a), Not(phi_b)), trace, 0)
        assert lhs == rhs

    @settings(max_examples=60, deadline=None)
    @given(formula_and_trace(),
           st.integers(min_value=0, max_value=3),
           st.integers(min_value=0, max_value=6))
    def test_eventually_is_true_until(self, pair, lo, width):
        phi, trace = pair
        hi = float(lo + width)
        ev = robustness(Eventually(float(lo), hi, phi), trace, 0)
        un = robustness(Until(float(lo), hi, BoolLit(True), phi), trace, 0)
        assert ev == un

    @settings(max_examples=60, deadline=None)
    @given(formula_and_trace(),
           st.integers(min_value=0, max_value=3),
           st.integers(min_value=0, max_value=6))
    def test_always_is_not_eventually_not(self, pair, lo, width):
        phi, trace = pair
        hi = float(lo + width)
        al = robustness(Always(float(lo), hi, phi), trace, 0)
        dual = robustness(Not(Eventually(float(lo), hi, Not(phi))), trace, 0)
        assert al == dual

    @settings(max_examples=60, deadline=None)
    @given(formula_and_trace(),
           st.integers(min_value=0, max_value=3),
           st.integers(min_value=0, max_value=4),
           st.integers(min_value=0, max_value=4))
    def test_widening_windows_monotone(self, pair, lo, width, extra):
        phi, trace = pair
        hi = float(lo + width)
        wider = hi + extra
        assert (robustness(Eventually(float(lo), wider, phi), trace, 0)
                >= robustness(Eventually(float(lo), hi, phi), trace, 0))
        assert (robustness(Always(float(lo), wider, phi), trace, 0)
                <= robustness(Always(float(lo), hi, phi), trace, 0))

    def test_exhaustive_boolean_traces(self):
        # every valuation of two boolean flags over traces up to length 6
        from oracle_boolean import holds as bool_holds
        shapes = [
            parse_spec("G (stopped | inJunction)"),
            parse_spec("F[0,2] (stopped & !inJunction)"),
            parse_spec("stopped U inJunction"),
            parse_spec("X (inJunction)"),
            parse_spec("G[1,3] (!stopped)"),
            parse_spec("F (stopped) & G (inJunction)"),
        ]
        for length in range(1, 7):
            for mask in range(4 ** length):
                scenes = []
                m = mask
                for _ in range(length):
                    scenes.append(make_scene(speed=0.0 if m % 2 else 10.0,
                                             in_junction=bool((m >> 1) % 2)))
                    m >>= 2
                trace = Trace(scenes)
                for phi in shapes:
                    rho = robustness(phi, trace, 0)
                    assert (rho > 0) == bool_holds(phi, trace, 0)
