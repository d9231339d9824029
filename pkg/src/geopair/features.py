"""Per-pair geometric features: parallelism angle, clearance distance, overlap ratio."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from . import geometry
from .errors import GeopairError, ValidationError
from .geo import GEOGRAPHIC, PLANAR, LineStringFeature, PlanarPoint, joint_origin, project_local

if TYPE_CHECKING:
    from .candidates import PairRecord

logger = logging.getLogger("geopair.features")

ANGLE_MODES = ("pairwise", "dominant")

# Recorded in report headers so downstream numbers are interpretable.
MAX_AREA_DEFINITION = (
    "max over the two linestrings of (shared buffered area / own buffered area)"
)


@dataclass(frozen=True)
class FeatureVector:
    min_angle_deg: float
    min_distance_m: float
    max_area: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.min_angle_deg <= 90.0):
            raise ValidationError(f"min_angle_deg {self.min_angle_deg} outside [0, 90]")
        if self.min_distance_m < 0.0:
            raise ValidationError(f"min_distance_m {self.min_distance_m} negative")
        if not (0.0 <= self.max_area <= 1.0):
            raise ValidationError(f"max_area {self.max_area} outside [0, 1]")

    def to_dict(self) -> dict[str, float]:
        return {
            "min_angle_deg": self.min_angle_deg,
            "min_distance_m": self.min_distance_m,
            "max_area": self.max_area,
        }

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "FeatureVector":
        return cls(
            min_angle_deg=float(d["min_angle_deg"]),
            min_distance_m=float(d["min_distance_m"]),
            max_area=float(d["max_area"]),
        )


@dataclass(frozen=True)
class FeatureConfig:
    overlap_buffer_m: float = 2.0
    angle_mode: str = "pairwise"

    def __post_init__(self) -> None:
        if self.overlap_buffer_m <= 0.0:
            raise ValidationError("overlap_buffer_m must be > 0")
        if self.angle_mode not in ANGLE_MODES:
            raise ValidationError(f"unknown angle_mode {self.angle_mode!r}")

    def to_dict(self) -> dict[str, object]:
        return {
            "overlap_buffer_m": self.overlap_buffer_m,
            "angle_mode": self.angle_mode,
            "max_area_definition": MAX_AREA_DEFINITION,
        }


def _to_polyline(feature: LineStringFeature, crs_mode: str, origin) -> geometry.Polyline:
    if crs_mode == PLANAR:
        pts = [PlanarPoint(c.lon, c.lat) for c in feature.coords]
    else:
        pts = project_local(feature.coords, origin)
    return geometry.polyline(pts)


def _max_area(u: geometry.Polyline, v: geometry.Polyline, w: float, min_distance: float) -> float:
    # Buffers of width w cannot meet once the lines are more than 2w apart.
    if min_distance > 2.0 * w:
        return 0.0
    bu = geometry.buffer_polyline(u, w)
    bv = geometry.buffer_polyline(v, w)
    inter = geometry.polygon_intersection_area(bu, bv)
    ratio = max(inter / bu.area(), inter / bv.area())
    return min(1.0, max(0.0, ratio))


def compute_features(
    left: LineStringFeature,
    right: LineStringFeature,
    cfg: FeatureConfig | None = None,
    crs_mode: str = GEOGRAPHIC,
) -> FeatureVector:
    """Compute the three pair features in a shared local frame (meters/degrees)."""
    cfg = cfg or FeatureConfig()
    origin = joint_origin(left, right) if crs_mode == GEOGRAPHIC else None
    u = _to_polyline(left, crs_mode, origin)
    v = _to_polyline(right, crs_mode, origin)
    if cfg.angle_mode == "dominant":
        angle = geometry.dominant_angle(u, v)
    else:
        angle = geometry.polyline_min_angle(u, v)
    distance = geometry.polyline_min_distance(u, v)
    overlap = _max_area(u, v, cfg.overlap_buffer_m, distance)
    return FeatureVector(min_angle_deg=angle, min_distance_m=distance, max_area=overlap)


@dataclass(frozen=True)
class FeatureError:
    pair_id: str
    message: str


def compute_features_batch(
    pairs: list["PairRecord"],
    cfg: FeatureConfig | None = None,
    crs_mode: str = GEOGRAPHIC,
) -> tuple[list["PairRecord"], list[FeatureError]]:
    """Fill features on each record; per-pair failures are collected, not raised."""
    cfg = cfg or FeatureConfig()
    filled: list[PairRecord] = []
    errors: list[FeatureError] = []
    for record in pairs:
        try:
            fv = compute_features(record.left_geom, record.right_geom, cfg, crs_mode)
        except GeopairError as exc:
            logger.warning("pair %s: %s", record.pair_id, exc)
            errors.append(FeatureError(pair_id=record.pair_id, message=str(exc)))
            continue
        filled.append(replace(record, features=fv))
    return filled, errors
