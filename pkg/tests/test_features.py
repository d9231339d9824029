import random

import pytest

from geopair.candidates import PairRecord
from geopair.errors import ValidationError
from geopair.features import (
    FeatureConfig,
    FeatureVector,
    compute_features,
    compute_features_batch,
)
from geopair.geo import PLANAR

from conftest import line_feature
from oracles import mc_intersection_area, shoelace


def planar_pair(coords_a, coords_b):
    return line_feature("a", coords_a), line_feature("b", coords_b)


def test_identical_linestrings():
    a, b = planar_pair([(0, 0), (30, 0), (30, 20)], [(0, 0), (30, 0), (30, 20)])
    fv = compute_features(a, b, crs_mode=PLANAR)
    assert fv.min_angle_deg == 0.0
    assert fv.min_distance_m == 0.0
    assert fv.max_area == 1.0


def test_parallel_offset_with_disjoint_buffers():
    a, b = planar_pair([(0, 0), (10, 0)], [(0, 3), (10, 3)])
    fv = compute_features(a, b, FeatureConfig(overlap_buffer_m=1.0), crs_mode=PLANAR)
    assert fv.min_angle_deg == 0.0
    assert fv.min_distance_m == pytest.approx(3.0)
    assert fv.max_area == 0.0


def test_perpendicular_crossing_ratio_matches_monte_carlo():
    from geopair.geometry import buffer_polyline, polyline

    a, b = planar_pair([(-10, 0), (10, 0)], [(0, -10), (0, 10)])
    cfg = FeatureConfig(overlap_buffer_m=2.0)
    fv = compute_features(a, b, cfg, crs_mode=PLANAR)
    assert fv.min_angle_deg == pytest.approx(90.0)
    assert fv.min_distance_m == 0.0

    ring_a = [(p.x, p.y) for p in buffer_polyline(polyline([(-10, 0), (10, 0)]), 2.0).ring]
    ring_b = [(p.x, p.y) for p in buffer_polyline(polyline([(0, -10), (0, 10)]), 2.0).ring]
    inter = mc_intersection_area(ring_a, ring_b, 200_000, seed=9)
    expected = max(inter / shoelace(ring_a), inter / shoelace(ring_b))
    assert fv.max_area == pytest.approx(expected, abs=0.02)


def test_features_symmetric_under_swap():
    a, b = planar_pair([(0, 0), (25, 2)], [(1, 3), (26, 4)])
    fv1 = compute_features(a, b, crs_mode=PLANAR)
    fv2 = compute_features(b, a, crs_mode=PLANAR)
    assert fv1.min_angle_deg == pytest.approx(fv2.min_angle_deg)
    assert fv1.min_distance_m == pytest.approx(fv2.min_distance_m)
    assert fv1.max_area == pytest.approx(fv2.max_area)


def test_features_invariant_under_vertex_reversal():
    a, b = planar_pair([(0, 0), (20, 1), (40, 0)], [(0, 4), (40, 5)])
    fv1 = compute_features(a, b, crs_mode=PLANAR)
    ar = line_feature("a", [(40, 0), (20, 1), (0, 0)])
    fv2 = compute_features(ar, b, crs_mode=PLANAR)
    assert fv1.min_angle_deg == pytest.approx(fv2.min_angle_deg, abs=1e-9)
    assert fv1.min_distance_m == pytest.approx(fv2.min_distance_m, abs=1e-9)
    assert fv1.max_area == pytest.approx(fv2.max_area, abs=1e-9)


def test_max_area_zero_beyond_double_buffer():
    rng = random.Random(2)
    for _ in range(20):
        w = rng.uniform(0.5, 3.0)
        gap = 2 * w + rng.uniform(0.2, 2.0)
        a, b = planar_pair([(0, 0), (15, 0)], [(0, gap), (15, gap)])
        fv = compute_features(a, b, FeatureConfig(overlap_buffer_m=w), crs_mode=PLANAR)
        assert fv.max_area == 0.0


def test_raw_intersection_means_zero_distance():
    a, b = planar_pair([(0, 0), (10, 10)], [(0, 10), (10, 0)])
    fv = compute_features(a, b, crs_mode=PLANAR)
    assert fv.min_distance_m == 0.0


def test_geographic_mode_projects_to_meters():
    # ~3 m offset in latitude near Bellevue
    dlat = 3.0 / 111_195.08
    a = line_feature("a", [(-122.20, 47.60), (-122.199, 47.60)])
    b = line_feature("b", [(-122.20, 47.60 + dlat), (-122.199, 47.60 + dlat)])
    fv = compute_features(a, b, FeatureConfig(overlap_buffer_m=1.0))
    assert fv.min_distance_m == pytest.approx(3.0, abs=1e-6)
    assert fv.max_area == 0.0


def make_record(i, a, b, label=None):
    return PairRecord(
        pair_id=f"p{i}", left_id=a.id, right_id=b.id, left_geom=a, right_geom=b, label=label
    )


def test_batch_empty():
    assert compute_features_batch([], crs_mode=PLANAR) == ([], [])


def test_batch_preserves_order_and_ids():
    pairs = []
    for i in range(3):
        a, b = planar_pair([(0, i), (10, i)], [(0, i + 2), (10, i + 2)])
        pairs.append(make_record(i, a, b))
    filled, errors = compute_features_batch(pairs, crs_mode=PLANAR)
    assert errors == []
    assert [p.pair_id for p in filled] == ["p0", "p1", "p2"]
    assert all(p.features is not None for p in filled)


def test_batch_collects_per_pair_errors():
    good_a = line_feature("a", [(0.0, 0.0), (0.001, 0.0)])
    good_b = line_feature("b", [(0.0, 0.0001), (0.001, 0.0001)])
    # geographic pair spanning > 1 degree cannot be projected
    wide_a = line_feature("wa", [(0.0, 0.0), (0.1, 0.0)])
    wide_b = line_feature("wb", [(2.5, 0.0), (2.6, 0.0)])
    pairs = [
        PairRecord(pair_id="ok", left_id="a", right_id="b", left_geom=good_a, right_geom=good_b),
        PairRecord(pair_id="broken", left_id="wa", right_id="wb", left_geom=wide_a, right_geom=wide_b),
    ]
    filled, errors = compute_features_batch(pairs)
    assert len(filled) == 1 and filled[0].pair_id == "ok"
    assert len(errors) == 1 and errors[0].pair_id == "broken"


def test_feature_vector_validation():
    with pytest.raises(ValidationError):
        FeatureVector(min_angle_deg=91.0, min_distance_m=0.0, max_area=0.0)
    with pytest.raises(ValidationError):
        FeatureVector(min_angle_deg=0.0, min_distance_m=-1.0, max_area=0.0)
    with pytest.raises(ValidationError):
        FeatureVector(min_angle_deg=0.0, min_distance_m=0.0, max_area=1.5)


def test_feature_config_validation():
    with pytest.raises(ValidationError):
        FeatureConfig(overlap_buffer_m=0.0)
    with pytest.raises(ValidationError):
        FeatureConfig(angle_mode="weird")
