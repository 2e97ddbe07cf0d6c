import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from dalis.errors import DegenerateAnchorsError, InsufficientAnchorsError, NoDataError
from dalis.geometry import (Point2D, RangeAnchor, centroid, euclidean_distance, localization_error,
                            trilaterate, trilaterate_arrays)
from tests.oracles import grid_residual_minimizer

coord = st.floats(-100, 100)


def test_distance_examples():
    assert euclidean_distance((0, 0), (3, 4)) == 5.0
    assert euclidean_distance((2, 2), (2, 2)) == 0.0
    assert euclidean_distance((2, 2), (4, 4)) == pytest.approx(2.8284, abs=1e-4)


def test_localization_error_examples():
    assert localization_error((2, 2), (2, 3)) == 1.0
    assert localization_error((1, 1), (1, 1)) == 0.0
    assert localization_error((0, 0), (6, 8)) == 10.0


def test_trilaterate_square_deployment():
    r = 2.8284
    p = trilaterate([RangeAnchor((4, 0), r), RangeAnchor((4, 4), r), RangeAnchor((0, 4), r)])
    assert p.x == pytest.approx(2.0, abs=1e-4) and p.y == pytest.approx(2.0, abs=1e-4)


def test_trilaterate_zero_range_anchor():
    p = trilaterate([RangeAnchor((0, 0), 0), RangeAnchor((4, 0), 4), RangeAnchor((0, 4), 4)])
    assert p.x == pytest.approx(0, abs=1e-12) and p.y == pytest.approx(0, abs=1e-12)


def test_trilaterate_noisy_triple_near_lower_intersection():
    anchors = [RangeAnchor((0, 0), 5.1), RangeAnchor((10, 0), 5.1), RangeAnchor((5, 8), 8.05)]
    p = trilaterate(anchors)
    assert math.hypot(p.x - 5.0, p.y - 0.0) < 0.2
    # the nonlinear residual minimizer sits on the same side, also within 0.2 m
    o, edge = grid_residual_minimizer(np.array([a.position for a in anchors]), np.array([a.range for a in anchors]),
                                center=(5.0, 0.0), half_width=0.5)
    assert not edge and math.hypot(o[0] - 5.0, o[1]) < 0.2
    assert p.x == pytest.approx(5.0, abs=1e-12) and p.y == pytest.approx(0.01296875, abs=1e-9)


def test_collinear_and_insufficient():
    with pytest.raises(DegenerateAnchorsError):
        trilaterate([RangeAnchor((0, 0), 1), RangeAnchor((5, 0), 4), RangeAnchor((9, 0), 8)])
    with pytest.raises(DegenerateAnchorsError):
        trilaterate([RangeAnchor((0, 0), 1), RangeAnchor((5, 0), 4), RangeAnchor((9, 0), 8), RangeAnchor((20, 0), 2)])
    with pytest.raises(InsufficientAnchorsError):
        trilaterate([RangeAnchor((0, 0), 1), RangeAnchor((5, 0), 4)])


def test_coincident_anchors_are_degenerate():
    with pytest.raises(DegenerateAnchorsError):
        trilaterate([RangeAnchor((1, 1), 1), RangeAnchor((1, 1), 1), RangeAnchor((1, 1), 2)])


def _area2(p):
    return abs((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))


@given(st.lists(st.tuples(coord, coord), min_size=3, max_size=3), st.tuples(coord, coord))
def test_exact_recovery(pts, truth):
    assume(_area2(pts) > 1.0)
    sides = [euclidean_distance(pts[i], pts[(i + 1) % 3]) for i in range(3)]
    assume(_area2(pts) / max(sides) ** 2 > 1e-3)  # keep the triangle away from collinear
    anchors = [RangeAnchor(p, euclidean_distance(p, truth)) for p in pts]
    est = trilaterate(anchors)
    assert euclidean_distance(est, truth) <= 1e-6


@given(st.lists(st.tuples(coord, coord), min_size=4, max_size=8), st.tuples(coord, coord))
def test_extra_anchors_do_not_move_exact_solution(pts, truth):
    assume(_area2(pts[:3]) > 1.0)
    sides = [euclidean_distance(pts[i], pts[(i + 1) % 3]) for i in range(3)]
    assume(_area2(pts[:3]) / max(sides) ** 2 > 1e-3)
    anchors = [RangeAnchor(p, euclidean_distance(p, truth)) for p in pts]
    a = trilaterate(anchors[:3])
    b = trilaterate(anchors)
    assert euclidean_distance(a, b) <= 1e-6


def test_three_anchor_fast_path_matches_general_solver():
    rng = np.random.default_rng(5)
    for _ in range(200):
        pos = rng.uniform(0, 50, (3, 2))
        r = rng.uniform(1, 40, 3)
        fast = trilaterate_arrays(pos, r)
        # duplicate the last anchor: same least-squares problem, general path
        slow = trilaterate_arrays(np.vstack([pos, pos[-1:]]), np.append(r, r[-1]))
        assert euclidean_distance(fast, slow) < 1e-6


def test_centroid_examples():
    assert centroid([(0, 0), (2, 0), (1, 3)]) == pytest.approx((1.0, 1.0))
    assert centroid([(5, 5)]) == (5, 5)
    assert centroid([(0, 0), (4, 4)]) == (2, 2)
    with pytest.raises(NoDataError):
        centroid([])


dyadic = st.integers(-4000, 4000).map(lambda k: k / 4)


@given(st.lists(st.tuples(dyadic, dyadic), min_size=1, max_size=8).filter(lambda p: len(p) in (1, 2, 4, 8)),
       st.tuples(dyadic, dyadic))
def test_centroid_translation_equivariant_exact(pts, v):
    moved = [(x + v[0], y + v[1]) for x, y in pts]
    c, cm = centroid(pts), centroid(moved)
    assert cm == (c[0] + v[0], c[1] + v[1])


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=10), st.tuples(coord, coord))
def test_centroid_translation_equivariant(pts, v):
    moved = [(x + v[0], y + v[1]) for x, y in pts]
    c, cm = centroid(pts), centroid(moved)
    assert cm[0] == pytest.approx(c[0] + v[0], abs=1e-9)
    assert cm[1] == pytest.approx(c[1] + v[1], abs=1e-9)


def test_point_type():
    p = Point2D(1.5, -2)
    assert (p.x, p.y) == (1.5, -2)
