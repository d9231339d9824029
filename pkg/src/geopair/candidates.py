"""Candidate pair generation: road filtering, buffered spatial join, union overlap, splits."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field

from shapely.geometry import LineString as _ShapelyLineString
from shapely.geometry import Polygon as _ShapelyPolygon

from . import geometry
from .errors import ValidationError
from .features import FeatureVector
from .geo import GEOGRAPHIC, Coordinate, FeatureSet, LineStringFeature, PlanarPoint, project_local

logger = logging.getLogger("geopair.candidates")

DEFAULT_ROAD_TYPES = frozenset(
    {"secondary", "residential", "tertiary", "primary", "living_street"}
)
DEFAULT_JOIN_BUFFER_M = 10.0

BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class PairRecord:
    """One candidate pair; label and features are filled by later stages."""

    pair_id: str
    left_id: str
    right_id: str
    left_geom: LineStringFeature
    right_geom: LineStringFeature
    label: int | None = None
    features: FeatureVector | None = None

    def __post_init__(self) -> None:
        if self.label is not None and self.label not in (0, 1):
            raise ValidationError(f"pair {self.pair_id}: label must be 0 or 1")


class SpatialIndex:
    """Uniform grid over feature bounding boxes; queries return a superset."""

    def __init__(self, items: list[tuple[str, BBox]], cell_size: float | None = None):
        self._cells: dict[tuple[int, int], list[str]] = {}
        if cell_size is None:
            cell_size = self._pick_cell_size(items)
        self.cell_size = cell_size
        for item_id, bbox in items:
            for key in self._keys(bbox):
                self._cells.setdefault(key, []).append(item_id)

    @staticmethod
    def _pick_cell_size(items: list[tuple[str, BBox]]) -> float:
        if not items:
            return 1.0
        dims = [max(b[2] - b[0], b[3] - b[1]) for _, b in items]
        dims.sort()
        median = dims[len(dims) // 2]
        return max(median * 2.0, 1e-9)

    def _keys(self, bbox: BBox):
        x0 = math.floor(bbox[0] / self.cell_size)
        x1 = math.floor(bbox[2] / self.cell_size)
        y0 = math.floor(bbox[1] / self.cell_size)
        y1 = math.floor(bbox[3] / self.cell_size)
        for ix in range(x0, x1 + 1):
            for iy in range(y0, y1 + 1):
                yield (ix, iy)

    def query(self, bbox: BBox) -> set[str]:
        hits: set[str] = set()
        for key in self._keys(bbox):
            hits.update(self._cells.get(key, ()))
        return hits


@dataclass(frozen=True)
class SplitSpec:
    train: float
    val: float
    test: float
    seed: int = 0

    def __post_init__(self) -> None:
        for r in (self.train, self.val, self.test):
            if r < 0:
                raise ValidationError("split ratios must be >= 0")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise ValidationError("split ratios must sum to 1")


def filter_roads(roads: FeatureSet, allowed: frozenset[str] | set[str] = DEFAULT_ROAD_TYPES) -> FeatureSet:
    """Keep roads whose "highway" property is in `allowed`; absent property drops."""
    kept = tuple(f for f in roads.features if f.properties.get("highway") in allowed)
    return FeatureSet(features=kept, crs_mode=roads.crs_mode)


def _planar_points(feature: LineStringFeature, crs_mode: str, origin: Coordinate | None) -> list[PlanarPoint]:
    if crs_mode == GEOGRAPHIC:
        assert origin is not None
        return project_local(feature.coords, origin)
    return [PlanarPoint(c.lon, c.lat) for c in feature.coords]


def _joint_bbox_origin(*sets: FeatureSet) -> Coordinate:
    lons: list[float] = []
    lats: list[float] = []
    for fs in sets:
        for f in fs.features:
            b = f.bbox()
            lons.extend((b[0], b[2]))
            lats.extend((b[1], b[3]))
    if not lons:
        raise ValidationError("cannot derive an origin from empty feature sets")
    return Coordinate((min(lons) + max(lons)) / 2.0, (min(lats) + max(lats)) / 2.0)


def _points_bbox(points: list[PlanarPoint]) -> BBox:
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return (min(xs), min(ys), max(xs), max(ys))


def _pair_id(left_id: str, right_id: str) -> str:
    return f"{left_id}__{right_id}"


def sidewalk_in_road_buffer(
    sidewalk_points: list[PlanarPoint], road_points: list[PlanarPoint], buffer_m: float
) -> bool:
    """The join predicate: sidewalk intersects the discretized road buffer."""
    buf = geometry.buffer_polyline(geometry.polyline(road_points), buffer_m)
    return _ShapelyLineString(sidewalk_points).intersects(_ShapelyPolygon(list(buf.ring)))


def join_candidates(
    roads: FeatureSet, sidewalks: FeatureSet, buffer_m: float = DEFAULT_JOIN_BUFFER_M
) -> list[PairRecord]:
    """Emit one (sidewalk, road) pair per sidewalk intersecting the buffered road.

    Index-accelerated but identical to brute-force all-pairs evaluation; output
    sorted by (road_id, sidewalk_id); labels left unset.
    """
    if buffer_m <= 0:
        raise ValidationError("buffer_m must be > 0")
    if roads.crs_mode != sidewalks.crs_mode:
        raise ValidationError("road and sidewalk sets must share a crs_mode")
    crs_mode = roads.crs_mode
    origin = _joint_bbox_origin(roads, sidewalks) if crs_mode == GEOGRAPHIC else None

    walk_points: dict[str, list[PlanarPoint]] = {}
    index_items: list[tuple[str, BBox]] = []
    for walk in sidewalks.features:
        pts = _projected_or_skip(walk, crs_mode, origin)
        if pts is None:
            continue
        walk_points[walk.id] = pts
        index_items.append((walk.id, _points_bbox(pts)))
    index = SpatialIndex(index_items)

    pairs: list[PairRecord] = []
    for road in sorted(roads.features, key=lambda f: f.id):
        road_pts = _projected_or_skip(road, crs_mode, origin)
        if road_pts is None:
            continue
        x0, y0, x1, y1 = _points_bbox(road_pts)
        query_box = (x0 - buffer_m, y0 - buffer_m, x1 + buffer_m, y1 + buffer_m)
        for walk_id in sorted(index.query(query_box)):
            if sidewalk_in_road_buffer(walk_points[walk_id], road_pts, buffer_m):
                walk = sidewalks.get(walk_id)
                pairs.append(
                    PairRecord(
                        pair_id=_pair_id(walk.id, road.id),
                        left_id=walk.id,
                        right_id=road.id,
                        left_geom=walk,
                        right_geom=road,
                    )
                )
    return pairs


def union_candidates(a: FeatureSet, b: FeatureSet) -> list[PairRecord]:
    """Emit one pair per (a_i, b_j) whose raw linestrings share at least one point."""
    if a.crs_mode != b.crs_mode:
        raise ValidationError("both sets must share a crs_mode")
    crs_mode = a.crs_mode
    origin = _joint_bbox_origin(a, b) if crs_mode == GEOGRAPHIC else None

    b_points: dict[str, list[PlanarPoint]] = {}
    index_items: list[tuple[str, BBox]] = []
    for feat in b.features:
        pts = _projected_or_skip(feat, crs_mode, origin)
        if pts is None:
            continue
        b_points[feat.id] = pts
        index_items.append((feat.id, _points_bbox(pts)))
    index = SpatialIndex(index_items)

    pairs: list[PairRecord] = []
    for left in sorted(a.features, key=lambda f: f.id):
        left_pts = _projected_or_skip(left, crs_mode, origin)
        if left_pts is None:
            continue
        left_line = geometry.polyline(left_pts)
        for right_id in sorted(index.query(_points_bbox(left_pts))):
            right_line = geometry.polyline(b_points[right_id])
            if geometry.polylines_intersect(left_line, right_line):
                right = b.get(right_id)
                pairs.append(
                    PairRecord(
                        pair_id=_pair_id(left.id, right.id),
                        left_id=left.id,
                        right_id=right.id,
                        left_geom=left,
                        right_geom=right,
                    )
                )
    return pairs


def _projected_or_skip(
    feature: LineStringFeature, crs_mode: str, origin: Coordinate | None
) -> list[PlanarPoint] | None:
    try:
        pts = _planar_points(feature, crs_mode, origin)
        geometry.polyline(pts)
    except ValidationError as exc:
        logger.warning("skipping feature %s: %s", feature.id, exc)
        return None
    return pts


def split_dataset(
    pairs: list[PairRecord], spec: SplitSpec
) -> tuple[list[PairRecord], list[PairRecord], list[PairRecord]]:
    """Seeded shuffle then contiguous partition; floor sizes, remainder to train/val/test."""
    for p in pairs:
        if p.label is None:
            raise ValidationError(f"pair {p.pair_id} is unlabeled; splits need labels")
    shuffled = list(pairs)
    random.Random(spec.seed).shuffle(shuffled)
    n = len(shuffled)
    sizes = [math.floor(n * r) for r in (spec.train, spec.val, spec.test)]
    remainder = n - sum(sizes)
    for i in range(remainder):
        sizes[i % 3] += 1
    train = shuffled[: sizes[0]]
    val = shuffled[sizes[0] : sizes[0] + sizes[1]]
    test = shuffled[sizes[0] + sizes[1] :]
    return train, val, test
