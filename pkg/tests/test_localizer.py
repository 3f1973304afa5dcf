import random

import pytest

from conftest import ramp_frames, random_trace, speed_trace
from formula_gen import random_formula
from oracle_reference import rho_ref

from driverepair.localizer import (
    MomentsNotFoundError,
    locate,
    moment_frames,
    prefix_robustness,
)
from driverepair.spec_lang import parse_spec
from driverepair.trace_model import Trace, build_trace


@pytest.fixture(scope="module")
def ramp():
    return speed_trace(range(91))


@pytest.fixture(scope="module")
def cap60():
    return parse_spec("G (speed < 60)")


class TestPrefixRobustness:
    def test_ramp_prefixes(self, ramp, cap60):
        assert prefix_robustness(cap60, ramp, 0) == pytest.approx(60.0)
        assert prefix_robustness(cap60, ramp, 1) == pytest.approx(59.0)
        assert prefix_robustness(cap60, ramp, 55) == pytest.approx(5.0)
        assert prefix_robustness(cap60, ramp, 60) == pytest.approx(0.0)
        assert prefix_robustness(cap60, ramp, 61) == pytest.approx(-1.0)

    def test_full_prefix_equals_whole_trace(self, ramp, cap60):
        from driverepair.spec_lang import robustness
        assert (prefix_robustness(cap60, ramp, len(ramp) - 1)
                == robustness(cap60, ramp, 0))

    def test_out_of_range(self, ramp, cap60):
        with pytest.raises(IndexError):
            prefix_robustness(cap60, ramp, len(ramp))

    def test_equals_truncated_copy(self):
        # bounded evaluation must agree with physically cutting the trace
        rng = random.Random(99)
        for _ in range(100):
            phi = random_formula(rng, depth=3)
            trace = random_trace(rng, max_len=10)
            k = rng.randrange(len(trace))
            cut = Trace(trace.scenes[: k + 1], dt=trace.dt)
            assert prefix_robustness(phi, trace, k) == pytest.approx(
                rho_ref(phi, cut, 0), abs=1e-9)


class TestLocate:
    def test_ramp_moments(self, ramp, cap60):
        moments = locate(cap60, ramp, delta=5.0)
        assert moments.violation_step == 60
        assert moments.near_miss_step == 55
        assert moments.prefix_rho[55] == pytest.approx(5.0)
        assert moments.prefix_rho[60] == pytest.approx(0.0)

    def test_never_violating(self, cap60):
        trace = speed_trace([10, 20, 30, 50])
        moments = locate(cap60, trace, delta=15.0)
        assert moments.violation_step is None
        assert moments.near_miss_step == 3   # margin 10 <= 15
        assert not moments.located

    def test_delta_zero_collapses(self, ramp, cap60):
        moments = locate(cap60, ramp, delta=0.0)
        assert moments.near_miss_step == moments.violation_step == 60

    def test_negative_delta_rejected(self, ramp, cap60):
        with pytest.raises(ValueError):
            locate(cap60, ramp, delta=-1.0)

    def test_minimality_by_rescan(self, cap60):
        rng = random.Random(5)
        for _ in range(30):
            speeds = [rng.uniform(0, 90) for _ in range(rng.randint(2, 60))]
            trace = speed_trace(speeds)
            delta = rng.uniform(0, 20)
            moments = locate(cap60, trace, delta)
            rhos = [prefix_robustness(cap60, trace, k)
                    for k in range(len(trace))]
            expect_near = next((k for k, r in enumerate(rhos) if r <= delta), None)
            expect_viol = next((k for k, r in enumerate(rhos) if r <= 0), None)
            assert moments.near_miss_step == expect_near
            assert moments.violation_step == expect_viol

    def test_delta_monotonicity(self, ramp, cap60):
        steps = []
        for delta in (1, 5, 10, 15, 20, 25, 30):
            steps.append(locate(cap60, ramp, delta).near_miss_step)
        assert steps == sorted(steps, reverse=True)


class TestMomentFrames:
    def test_gap_for_ramp(self, cap60):
        frames = ramp_frames(91, dt=0.1)
        trace = build_trace(frames, dt=0.1)
        moments = locate(cap60, trace, delta=5.0)
        near, viol, gap = moment_frames(moments, frames)
        assert near.ego.speed == 55.0
        assert viol.ego.speed == 60.0
        assert gap == pytest.approx(0.5)

    def test_zero_gap(self, cap60):
        frames = ramp_frames(91, dt=0.1)
        trace = build_trace(frames, dt=0.1)
        moments = locate(cap60, trace, delta=0.0)
        _, _, gap = moment_frames(moments, frames)
        assert gap == 0.0

    def test_missing_moments_raise(self, cap60):
        frames = ramp_frames(10, dt=0.1)
        trace = build_trace(frames, dt=0.1)
        moments = locate(cap60, trace, delta=5.0)
        assert moments.violation_step is None
        with pytest.raises(MomentsNotFoundError):
            moment_frames(moments, frames)

    def test_benchmark_gap_is_short_and_positive(self, baseline_runs, specs):
        from driverepair.simulator import PAIRED_SPECS
        run = baseline_runs["S1"]
        moments = locate(specs[PAIRED_SPECS["S1"]], run["trace"], delta=15.0)
        _, _, gap = moment_frames(moments, run["frames"])
        assert 0 < gap <= 10.0
