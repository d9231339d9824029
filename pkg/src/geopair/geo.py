"""GeoJSON linestring I/O and the local planar frame used for metric computations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple

from .errors import ExtentError, ParseError, ValidationError

EARTH_RADIUS_M = 6_371_008.8

# Local frames are only trusted near the origin; anything wider is split upstream.
MAX_EXTENT_DEG = 1.0
MAX_ABS_LAT_DEG = 85.0

GEOGRAPHIC = "geographic"
PLANAR = "planar"
CRS_MODES = (GEOGRAPHIC, PLANAR)


class Coordinate(NamedTuple):
    """A WGS84 position in degrees (or raw x/y meters in planar mode)."""

    lon: float
    lat: float


class PlanarPoint(NamedTuple):
    """A point in a local east/north frame, meters."""

    x: float
    y: float


def validate_coordinate(c: Coordinate, crs_mode: str = GEOGRAPHIC) -> None:
    if not (math.isfinite(c.lon) and math.isfinite(c.lat)):
        raise ValidationError(f"non-finite coordinate {c!r}")
    if crs_mode == GEOGRAPHIC:
        if not (-180.0 <= c.lon <= 180.0):
            raise ValidationError(f"longitude {c.lon} outside [-180, 180]")
        if not (-90.0 <= c.lat <= 90.0):
            raise ValidationError(f"latitude {c.lat} outside [-90, 90]")


@dataclass(frozen=True)
class LineStringFeature:
    """An identified polyline with a string property map."""

    id: str
    coords: tuple[Coordinate, ...]
    properties: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.coords) < 2:
            raise ValidationError(
                f"feature {self.id!r}: linestring needs >= 2 distinct vertices"
            )

    def bbox(self) -> tuple[float, float, float, float]:
        lons = [c.lon for c in self.coords]
        lats = [c.lat for c in self.coords]
        return (min(lons), min(lats), max(lons), max(lats))


@dataclass(frozen=True)
class FeatureSet:
    """A collection of linestring features sharing one coordinate interpretation."""

    features: tuple[LineStringFeature, ...]
    crs_mode: str = GEOGRAPHIC

    def __post_init__(self) -> None:
        if self.crs_mode not in CRS_MODES:
            raise ValidationError(f"unknown crs_mode {self.crs_mode!r}")
        seen: set[str] = set()
        for f in self.features:
            if f.id in seen:
                raise ValidationError(f"duplicate feature id {f.id!r}")
            seen.add(f.id)

    def __len__(self) -> int:
        return len(self.features)

    def get(self, feature_id: str) -> LineStringFeature:
        for f in self.features:
            if f.id == feature_id:
                return f
        raise KeyError(feature_id)


def _dedupe_consecutive(coords: Iterable[Coordinate]) -> tuple[Coordinate, ...]:
    out: list[Coordinate] = []
    for c in coords:
        if not out or out[-1] != c:
            out.append(c)
    return tuple(out)


def _coerce_properties(raw: Any) -> dict[str, str]:
    props: dict[str, str] = {}
    if not isinstance(raw, dict):
        return props
    for key, value in raw.items():
        if value is None or isinstance(value, (dict, list)):
            continue
        props[str(key)] = value if isinstance(value, str) else str(value)
    return props


def parse_geojson(data: bytes | str, crs_mode: str = GEOGRAPHIC) -> FeatureSet:
    """Parse an RFC 7946 FeatureCollection into validated linestring features.

    Non-LineString geometries are skipped. Features without an "id" get a
    stable index-derived one. Consecutive duplicate vertices are collapsed.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed GeoJSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection")

    features: list[LineStringFeature] = []
    for index, raw in enumerate(doc.get("features") or []):
        if not isinstance(raw, dict):
            raise ParseError(f"feature #{index} is not an object")
        geom = raw.get("geometry") or {}
        if geom.get("type") != "LineString":
            continue
        fid = raw.get("id")
        if fid is None:
            fid = (raw.get("properties") or {}).get("id") if isinstance(raw.get("properties"), dict) else None
        fid = f"f{index}" if fid is None else str(fid)
        raw_coords = geom.get("coordinates") or []
        coords: list[Coordinate] = []
        for pos in raw_coords:
            if not isinstance(pos, (list, tuple)) or len(pos) < 2:
                raise ParseError(f"feature {fid!r}: bad coordinate {pos!r}")
            c = Coordinate(float(pos[0]), float(pos[1]))
            validate_coordinate(c, crs_mode)
            coords.append(c)
        deduped = _dedupe_consecutive(coords)
        if len(deduped) < 2:
            raise ValidationError(
                f"feature {fid!r}: linestring needs >= 2 distinct vertices"
            )
        features.append(
            LineStringFeature(id=fid, coords=deduped, properties=_coerce_properties(raw.get("properties")))
        )
    return FeatureSet(features=tuple(features), crs_mode=crs_mode)


def geometry_dict(feature: LineStringFeature) -> dict[str, Any]:
    return {
        "type": "LineString",
        "coordinates": [[c.lon, c.lat] for c in feature.coords],
    }


def feature_dict(feature: LineStringFeature) -> dict[str, Any]:
    return {
        "type": "Feature",
        "id": feature.id,
        "properties": dict(sorted(feature.properties.items())),
        "geometry": geometry_dict(feature),
    }


def serialize_geojson(fs: FeatureSet) -> str:
    doc = {
        "type": "FeatureCollection",
        "features": [feature_dict(f) for f in fs.features],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _check_extent(coords: Iterable[Coordinate], origin: Coordinate) -> None:
    if abs(origin.lat) > MAX_ABS_LAT_DEG:
        raise ExtentError(f"origin latitude {origin.lat} is out of the supported urban range")
    for c in coords:
        if abs(c.lat) > MAX_ABS_LAT_DEG:
            raise ExtentError(f"latitude {c.lat} is out of the supported urban range")
        if abs(c.lon - origin.lon) > MAX_EXTENT_DEG or abs(c.lat - origin.lat) > MAX_EXTENT_DEG:
            raise ExtentError(
                f"coordinate {c!r} farther than {MAX_EXTENT_DEG} deg from origin {origin!r}"
            )


def project_local(coords: Iterable[Coordinate], origin: Coordinate) -> list[PlanarPoint]:
    """Equirectangular projection about `origin`, meters east/north."""
    coords = list(coords)
    _check_extent(coords, origin)
    k = math.pi / 180.0 * EARTH_RADIUS_M
    cos_lat0 = math.cos(math.radians(origin.lat))
    return [
        PlanarPoint((c.lon - origin.lon) * cos_lat0 * k, (c.lat - origin.lat) * k)
        for c in coords
    ]


def unproject_local(points: Iterable[PlanarPoint], origin: Coordinate) -> list[Coordinate]:
    k = math.pi / 180.0 * EARTH_RADIUS_M
    cos_lat0 = math.cos(math.radians(origin.lat))
    return [
        Coordinate(origin.lon + p.x / (cos_lat0 * k), origin.lat + p.y / k)
        for p in points
    ]


def haversine_m(a: Coordinate, b: Coordinate) -> float:
    """Great-circle distance in meters."""
    validate_coordinate(a)
    validate_coordinate(b)
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def joint_origin(*features: LineStringFeature) -> Coordinate:
    """Bounding-box centroid of all vertices, the per-pair projection origin."""
    lons: list[float] = []
    lats: list[float] = []
    for f in features:
        for c in f.coords:
            lons.append(c.lon)
            lats.append(c.lat)
    if not lons:
        raise ValidationError("no coordinates to derive an origin from")
    return Coordinate((min(lons) + max(lons)) / 2.0, (min(lats) + max(lats)) / 2.0)
