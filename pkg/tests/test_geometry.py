import math
import random

import pytest

from geopair.errors import ValidationError
from geopair.geo import PlanarPoint
from geopair.geometry import (
    Polyline,
    Segment,
    convex_hull,
    dominant_angle,
    orientation,
    point_in_triangle,
    point_to_segment_distance,
    polyline,
    polyline_min_angle,
    polyline_min_distance,
    segment_bearing,
    segment_to_segment_distance,
    segments_intersect,
)

from oracles import brute_hull_vertices


def P(x, y):
    return PlanarPoint(float(x), float(y))


def seg(x1, y1, x2, y2):
    return Segment(P(x1, y1), P(x2, y2))


# --- orientation -----------------------------------------------------------


def test_orientation_left_turn():
    assert orientation(P(0, 0), P(1, 0), P(0, 1)) == 1


def test_orientation_collinear():
    assert orientation(P(0, 0), P(1, 0), P(2, 0)) == 0


def test_orientation_right_turn():
    assert orientation(P(0, 0), P(1, 0), P(1, -1)) == -1


def test_orientation_scaled_epsilon():
    # a 1e-8 bend at city-scale coordinates is below the scaled threshold
    assert orientation(P(10000, 10000), P(20000, 10000), P(30000, 10000 + 1e-8)) == 0
    assert orientation(P(10000, 10000), P(20000, 10000), P(30000, 10000 + 1e-2)) == 1


# --- point to segment ------------------------------------------------------


def test_p2s_interior_foot():
    assert point_to_segment_distance(P(0.5, 0.5), seg(0, 0, 1, 0)) == pytest.approx(0.5)


def test_p2s_clamped_to_endpoint():
    assert point_to_segment_distance(P(2, 0), seg(0, 0, 1, 0)) == pytest.approx(1.0)


def test_p2s_point_on_segment():
    assert point_to_segment_distance(P(0.25, 0), seg(0, 0, 1, 0)) == 0.0


def test_p2s_bounded_by_endpoint_distances():
    rng = random.Random(1)
    for _ in range(500):
        s = seg(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))
        p = P(rng.uniform(-5, 5), rng.uniform(-5, 5))
        d = point_to_segment_distance(p, s)
        assert d <= min(math.dist(p, s.a), math.dist(p, s.b)) + 1e-12


def test_degenerate_segment_rejected():
    with pytest.raises(ValidationError):
        seg(1, 1, 1, 1)


# --- segment intersection --------------------------------------------------


def test_segments_crossing_diagonals():
    assert segments_intersect(seg(0, 0, 1, 1), seg(0, 1, 1, 0))


def test_segments_parallel_disjoint():
    assert not segments_intersect(seg(0, 0, 1, 0), seg(0, 1, 1, 1))


def test_segments_shared_endpoint_counts():
    assert segments_intersect(seg(0, 0, 1, 0), seg(1, 0, 2, 1))


def test_segments_collinear_overlap_counts():
    assert segments_intersect(seg(0, 0, 2, 0), seg(1, 0, 3, 0))


def test_segments_collinear_disjoint():
    assert not segments_intersect(seg(0, 0, 1, 0), seg(2, 0, 3, 0))


def test_intersection_symmetric_and_matches_zero_distance():
    rng = random.Random(99)
    for _ in range(10_000):
        s1 = seg(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1))
        s2 = seg(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1))
        hit = segments_intersect(s1, s2)
        assert hit == segments_intersect(s2, s1)
        assert hit == (segment_to_segment_distance(s1, s2) == 0.0)


# --- triangle containment --------------------------------------------------


def test_triangle_centroid_inside():
    tri = (P(0, 0), P(3, 1), P(1, 4))
    centroid = P(4 / 3, 5 / 3)
    assert point_in_triangle(centroid, tri)


def test_triangle_exterior_point():
    assert not point_in_triangle(P(5, 5), (P(0, 0), P(1, 0), P(0, 1)))


def test_triangle_vertex_is_inside():
    assert point_in_triangle(P(0, 0), (P(0, 0), P(1, 0), P(0, 1)))


def test_triangle_edge_midpoint_is_inside():
    assert point_in_triangle(P(0.5, 0), (P(0, 0), P(1, 0), P(0, 1)))


def test_triangle_winding_does_not_matter():
    assert point_in_triangle(P(0.2, 0.2), (P(0, 0), P(0, 1), P(1, 0)))


def test_degenerate_triangle_rejected():
    with pytest.raises(ValidationError):
        point_in_triangle(P(0, 0), (P(0, 0), P(1, 1), P(2, 2)))


# --- convex hull ------------------------------------------------------------


def test_hull_excludes_interior_point():
    pts = [P(0, 0), P(1, 0), P(1, 1), P(0, 1), P(0.5, 0.5)]
    assert convex_hull(pts) == [P(0, 0), P(1, 0), P(1, 1), P(0, 1)]


def test_hull_collinear_input_gives_extremes():
    assert convex_hull([P(0, 0), P(1, 1), P(2, 2)]) == [P(0, 0), P(2, 2)]


def test_hull_single_point_and_duplicates():
    assert convex_hull([P(3, 3), P(3, 3)]) == [P(3, 3)]


def test_hull_matches_brute_force_on_random_points():
    rng = random.Random(8)
    for _ in range(200):
        pts = [P(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(8)]
        hull = convex_hull(pts)
        assert set((p.x, p.y) for p in hull) == brute_hull_vertices([(p.x, p.y) for p in pts])


def test_hull_idempotent_and_ccw_from_lexicographic_min():
    rng = random.Random(21)
    for _ in range(100):
        pts = [P(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(12)]
        hull = convex_hull(pts)
        assert convex_hull(hull) == hull
        assert hull[0] == min(hull)
        assert set(hull) <= set(pts)
        # every input point inside-or-on the hull ring
        n = len(hull)
        for q in pts:
            assert all(
                orientation(hull[i], hull[(i + 1) % n], q) >= 0 for i in range(n)
            )


# --- bearings and angles ----------------------------------------------------


def test_bearing_axes():
    assert segment_bearing(seg(0, 0, 1, 0)) == 0.0
    assert segment_bearing(seg(0, 0, 0, 1)) == 90.0
    assert segment_bearing(seg(0, 0, -1, 0)) == 180.0


def test_min_angle_identical_lines():
    u = polyline([(0, 0), (10, 0)])
    assert polyline_min_angle(u, u) == 0.0


def test_min_angle_perpendicular():
    u = polyline([(0, 0), (10, 0)])
    v = polyline([(0, 0), (0, 10)])
    assert polyline_min_angle(u, v) == pytest.approx(90.0)


def test_min_angle_l_shape_vs_straight_is_zero():
    l_shape = polyline([(0, 0), (5, 0), (5, 5)])
    straight = polyline([(0, 1), (9, 1)])
    assert polyline_min_angle(l_shape, straight) == pytest.approx(0.0)


def _random_polyline(rng, n=4, scale=10.0):
    pts = [(rng.uniform(0, scale), rng.uniform(0, scale))]
    while len(pts) < n:
        q = (rng.uniform(0, scale), rng.uniform(0, scale))
        if q != pts[-1]:
            pts.append(q)
    return polyline(pts)


def test_min_angle_invariances():
    rng = random.Random(3)
    for _ in range(50):
        u = _random_polyline(rng)
        v = _random_polyline(rng)
        base = polyline_min_angle(u, v)
        assert 0.0 <= base <= 90.0
        assert polyline_min_angle(v, u) == pytest.approx(base)
        ur = polyline(list(reversed(u.points)))
        assert polyline_min_angle(ur, v) == pytest.approx(base)
        # one rigid rotation + translation + uniform scaling applied to both
        theta, tx, ty, k = rng.uniform(0, math.tau), 3.0, -7.0, 2.5

        def rigid(line):
            return polyline(
                [
                    (
                        k * (p.x * math.cos(theta) - p.y * math.sin(theta)) + tx,
                        k * (p.x * math.sin(theta) + p.y * math.cos(theta)) + ty,
                    )
                    for p in line.points
                ]
            )

        assert polyline_min_angle(rigid(u), rigid(v)) == pytest.approx(base, abs=1e-9)


def test_dominant_angle_equals_pairwise_for_straight_lines():
    u = polyline([(0, 0), (10, 0)])
    v = polyline([(0, 5), (10, 8)])
    assert dominant_angle(u, v) == pytest.approx(polyline_min_angle(u, v))


# --- polyline distance ------------------------------------------------------


def test_min_distance_parallel_offset():
    u = polyline([(0, 0), (10, 0)])
    v = polyline([(0, 3), (10, 3)])
    assert polyline_min_distance(u, v) == pytest.approx(3.0)


def test_min_distance_crossing_is_zero():
    u = polyline([(0, 0), (10, 10)])
    v = polyline([(0, 10), (10, 0)])
    assert polyline_min_distance(u, v) == 0.0


def test_min_distance_endpoint_to_endpoint():
    u = polyline([(0, 0), (1, 0)])
    v = polyline([(3, 4), (3, 5)])
    assert polyline_min_distance(u, v) == pytest.approx(math.sqrt(20))


def test_min_distance_symmetric_and_translation_invariant():
    rng = random.Random(17)
    for _ in range(50):
        u = _random_polyline(rng)
        v = _random_polyline(rng)
        d = polyline_min_distance(u, v)
        assert d >= 0.0
        assert polyline_min_distance(v, u) == pytest.approx(d)
        shift = lambda line: polyline([(p.x + 100.0, p.y - 50.0) for p in line.points])
        assert polyline_min_distance(shift(u), shift(v)) == pytest.approx(d, abs=1e-9)


def test_polyline_validation():
    with pytest.raises(ValidationError):
        Polyline(points=(P(0, 0),))
    with pytest.raises(ValidationError):
        polyline([(0, 0), (0, 0), (1, 1)])
