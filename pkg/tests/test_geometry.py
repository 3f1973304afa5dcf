import math

import pytest

from driverepair.geometry import (
    obb_corners,
    obb_distance,
    obb_overlap,
    segment_hits_aabb,
)


def box(x, y, heading=0.0, hl=2.0, hw=1.0):
    return obb_corners(x, y, heading, hl, hw)


class TestOverlap:
    def test_disjoint(self):
        assert not obb_overlap(box(0, 0), box(10, 0))

    def test_overlapping(self):
        assert obb_overlap(box(0, 0), box(3, 0))

    def test_touching_counts_as_overlap(self):
        assert obb_overlap(box(0, 0), box(4.0, 0))

    def test_rotated_diagonal_miss(self):
        # corner-to-corner near miss only detectable on a diagonal axis
        a = box(0, 0, 0.0, 2.0, 1.0)
        b = box(4.2, 3.3, math.pi / 4, 2.0, 1.0)
        assert not obb_overlap(a, b)
        assert obb_distance(a, b) > 1.0

    def test_cross_configuration(self):
        a = box(0, 0, 0.0, 3.0, 0.5)
        b = box(0, 0, math.pi / 2, 3.0, 0.5)
        assert obb_overlap(a, b)


class TestDistance:
    def test_axis_aligned_gap(self):
        assert obb_distance(box(0, 0), box(10, 0)) == pytest.approx(6.0)

    def test_lateral_gap(self):
        assert obb_distance(box(0, 0), box(0, 5)) == pytest.approx(3.0)

    def test_zero_when_overlapping(self):
        assert obb_distance(box(0, 0), box(1, 0)) == 0.0

    def test_corner_to_corner(self):
        a = box(0, 0, 0.0, 1.0, 1.0)
        b = box(4, 4, 0.0, 1.0, 1.0)
        assert obb_distance(a, b) == pytest.approx(math.hypot(2, 2))

    def test_symmetry(self):
        a = box(0, 0, 0.3)
        b = box(7, 2, -0.8)
        assert obb_distance(a, b) == pytest.approx(obb_distance(b, a))


class TestSegmentAabb:
    def test_crossing_segment(self):
        assert segment_hits_aabb(-5, 0, 5, 0, -1, 1, -1, 1)

    def test_miss(self):
        assert not segment_hits_aabb(-5, 3, 5, 3, -1, 1, -1, 1)

    def test_fully_inside(self):
        assert segment_hits_aabb(0.1, 0.1, 0.2, 0.2, 0, 1, 0, 1)

    def test_fast_diagonal_through_box(self):
        # endpoints on both sides, no sample point inside
        assert segment_hits_aabb(-10, -10, 10, 10, -1, 1, -1, 1)

    def test_degenerate_point(self):
        assert segment_hits_aabb(0.5, 0.5, 0.5, 0.5, 0, 1, 0, 1)
        assert not segment_hits_aabb(2, 2, 2, 2, 0, 1, 0, 1)
