"""Floorplan geometry and image-source tracing."""

import math

import numpy as np
import pytest

from rislabel.errors import RejectedInputError
from rislabel.scene import (FloorPlan, rectangle_plan, trace_paths, unfolded_length,
                            visibility)


def empty_plan():
    return FloorPlan(walls=np.empty((0, 2, 2)), bounds=(-100, -100, 100, 100))


def one_wall_plan():
    return FloorPlan(walls=[[(-10.0, 0.0), (10.0, 0.0)]], bounds=(-20, -20, 20, 20))


class TestVisibility:
    def test_no_walls(self):
        assert visibility(empty_plan(), (0, 0), (3, 4))

    def test_blocked_at_midpoint(self):
        plan = FloorPlan(walls=[[(2.0, -1.0), (2.0, 1.0)]], bounds=(-10, -10, 10, 10))
        assert not visibility(plan, (0, 0), (4, 0))

    def test_endpoint_contact_is_clear(self):
        # Anchor mounted on a wall: the sightline ends exactly on the wall.
        plan = one_wall_plan()
        a, b = np.array([3.0, 5.0]), np.array([1.0, 0.0])
        # Oracle: the open segment strictly before b never reaches y=0.
        for s in np.linspace(1e-6, 1 - 1e-6, 1001):
            y = a[1] + s * (b[1] - a[1])
            assert y > 0
        assert visibility(plan, a, b)

    def test_wall_parallel_but_offset(self):
        assert visibility(one_wall_plan(), (-5, 1), (5, 1))

    def test_collinear_overlap_blocks(self):
        assert not visibility(one_wall_plan(), (-5.0, 0.0), (5.0, 0.0))

    def test_identical_endpoints_rejected(self):
        with pytest.raises(RejectedInputError):
            visibility(empty_plan(), (1, 1), (1, 1))


class TestTracePaths:
    def test_los_only_in_empty_plan(self):
        paths = trace_paths(empty_plan(), (0, 0), (3, 4), max_reflections=3)
        assert len(paths) == 1
        assert paths[0].reflection_count == 0
        assert paths[0].total_length == pytest.approx(5.0, abs=1e-12)

    def test_single_wall_bounce_matches_mirror_construction(self):
        # Analytic image: source (0,1) mirrors to (0,-1) across y=0; the line
        # to (4,1) crosses y=0 at (2,0); total length sqrt(4^2 + 2^2).
        paths = trace_paths(one_wall_plan(), (0, 1), (4, 1), max_reflections=1)
        assert len(paths) == 2
        los, bounce = paths
        assert los.reflection_count == 0
        assert los.total_length == pytest.approx(4.0, abs=1e-12)
        assert bounce.reflection_count == 1
        assert bounce.total_length == pytest.approx(math.sqrt(20.0), abs=1e-12)
        assert bounce.vertices[1] == pytest.approx([2.0, 0.0], abs=1e-12)

    def test_rectangle_has_up_to_triple_reflections(self):
        plan = rectangle_plan(20.0, 12.0)
        paths = trace_paths(plan, (2, 6), (10, 6), max_reflections=3)
        counts = {p.reflection_count for p in paths}
        assert {0, 1, 2, 3} <= counts

    def test_unfolding_invariant(self):
        plan = rectangle_plan(20.0, 12.0)
        for p in trace_paths(plan, (2.0, 6.0), (13.0, 4.0), max_reflections=3):
            if p.reflection_count == 0:
                continue
            assert unfolded_length(plan, p) == pytest.approx(p.total_length, abs=1e-9)

    def test_reciprocity(self):
        plan = rectangle_plan(20.0, 12.0)
        fwd = sorted(p.total_length for p in trace_paths(plan, (2, 6), (13, 4), 3))
        rev = sorted(p.total_length for p in trace_paths(plan, (13, 4), (2, 6), 3))
        assert len(fwd) == len(rev)
        assert np.allclose(fwd, rev, atol=1e-9)

    def test_path_count_monotone_in_reflections(self):
        plan = rectangle_plan(20.0, 12.0)
        lengths = []
        for r in range(4):
            paths = trace_paths(plan, (2, 6), (13, 4), r)
            lengths.append(sorted(p.total_length for p in paths))
        for shallow, deep in zip(lengths[:-1], lengths[1:]):
            assert len(deep) >= len(shallow)
            # every shallow path survives verbatim
            di = 0
            for s in shallow:
                while di < len(deep) and abs(deep[di] - s) > 1e-9:
                    di += 1
                assert di < len(deep)
                di += 1

    def test_arrival_angle_points_back_along_final_leg(self):
        paths = trace_paths(empty_plan(), (0, 0), (3, 4), 0)
        # Bearing from the sink back toward the source.
        assert paths[0].arrival_angle == pytest.approx(math.atan2(-4, -3) % (2 * math.pi))
        assert paths[0].departure_angle == pytest.approx(math.atan2(4, 3))

    def test_source_on_wall_rejected(self):
        with pytest.raises(RejectedInputError):
            trace_paths(one_wall_plan(), (0.0, 0.0), (4.0, 1.0), 1)

    def test_source_equals_sink_rejected(self):
        with pytest.raises(RejectedInputError):
            trace_paths(empty_plan(), (1.0, 2.0), (1.0, 2.0), 1)

    def test_blocked_los_dropped(self):
        plan = FloorPlan(walls=[[(2.0, -1.0), (2.0, 1.0)]], bounds=(-10, -10, 10, 10))
        paths = trace_paths(plan, (0, 0), (4, 0), 0)
        assert paths == []


class TestFloorPlanValidation:
    def test_zero_length_wall_rejected(self):
        with pytest.raises(RejectedInputError):
            FloorPlan(walls=[[(1.0, 1.0), (1.0, 1.0)]], bounds=(0, 0, 2, 2))

    def test_empty_bounds_rejected(self):
        with pytest.raises(RejectedInputError):
            FloorPlan(walls=np.empty((0, 2, 2)), bounds=(0, 0, 0, 5))
