"""Planar computational-geometry primitives: predicates, polyline metrics, buffers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from shapely.geometry import LineString as _ShapelyLineString
from shapely.geometry import Polygon as _ShapelyPolygon

from .errors import ValidationError
from .geo import PlanarPoint

# Cross products below this (scaled by coordinate magnitude squared) count as zero.
CROSS_EPS = 1e-12

# Round joins/caps are discretized at this many chords per quarter circle.
BUFFER_QUAD_SEGS = 16


@dataclass(frozen=True)
class Segment:
    a: PlanarPoint
    b: PlanarPoint

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValidationError(f"degenerate segment at {self.a!r}")

    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)


@dataclass(frozen=True)
class Polyline:
    points: tuple[PlanarPoint, ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValidationError("polyline needs >= 2 points")
        for p, q in zip(self.points, self.points[1:]):
            if p == q:
                raise ValidationError(f"polyline has consecutive duplicate at {p!r}")

    def segments(self) -> list[Segment]:
        return [Segment(p, q) for p, q in zip(self.points, self.points[1:])]


@dataclass(frozen=True)
class SimplePolygon:
    """A simple polygon stored as a counterclockwise ring (first vertex not repeated)."""

    ring: tuple[PlanarPoint, ...]

    def __post_init__(self) -> None:
        if len(self.ring) < 3:
            raise ValidationError("polygon ring needs >= 3 vertices")
        if signed_ring_area(self.ring) <= 0.0:
            raise ValidationError("polygon ring must be counterclockwise with positive area")

    def area(self) -> float:
        return signed_ring_area(self.ring)


def polyline(points: Sequence[tuple[float, float] | PlanarPoint]) -> Polyline:
    return Polyline(tuple(PlanarPoint(float(p[0]), float(p[1])) for p in points))


def signed_ring_area(ring: Sequence[PlanarPoint]) -> float:
    total = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return total / 2.0


def orientation(p: PlanarPoint, q: PlanarPoint, r: PlanarPoint) -> int:
    """Sign of the turn p->q->r: +1 left, -1 right, 0 collinear (within scaled epsilon)."""
    cross = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    scale = max(1.0, abs(p.x), abs(p.y), abs(q.x), abs(q.y), abs(r.x), abs(r.y))
    if abs(cross) < CROSS_EPS * scale * scale:
        return 0
    return 1 if cross > 0 else -1


def point_to_segment_distance(p: PlanarPoint, s: Segment) -> float:
    ax, ay = s.a
    dx, dy = s.b.x - ax, s.b.y - ay
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def _within_bbox(p: PlanarPoint, s: Segment) -> bool:
    return (
        min(s.a.x, s.b.x) <= p.x <= max(s.a.x, s.b.x)
        and min(s.a.y, s.b.y) <= p.y <= max(s.a.y, s.b.y)
    )


def segments_intersect(s1: Segment, s2: Segment) -> bool:
    """Closed-segment intersection; endpoint touching counts."""
    o1 = orientation(s1.a, s1.b, s2.a)
    o2 = orientation(s1.a, s1.b, s2.b)
    o3 = orientation(s2.a, s2.b, s1.a)
    o4 = orientation(s2.a, s2.b, s1.b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _within_bbox(s2.a, s1):
        return True
    if o2 == 0 and _within_bbox(s2.b, s1):
        return True
    if o3 == 0 and _within_bbox(s1.a, s2):
        return True
    if o4 == 0 and _within_bbox(s1.b, s2):
        return True
    return False


def point_in_triangle(p: PlanarPoint, t: Sequence[PlanarPoint]) -> bool:
    """Boundary-inclusive containment in a non-degenerate triangle."""
    if len(t) != 3:
        raise ValidationError("triangle needs exactly 3 vertices")
    a, b, c = t
    area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    if abs(area2) < 1e-12:
        raise ValidationError("degenerate triangle")
    if area2 < 0:
        b, c = c, b
    return (
        orientation(a, b, p) >= 0
        and orientation(b, c, p) >= 0
        and orientation(c, a, p) >= 0
    )


def convex_hull(points: Iterable[PlanarPoint]) -> list[PlanarPoint]:
    """Strictly convex hull, counterclockwise from the lexicographically smallest point.

    Collinear mid-edge points are dropped; all-collinear input yields the two extremes.
    """
    pts = sorted(set(points))
    if len(pts) <= 1:
        return pts

    def cross(o: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> float:
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)

    lower: list[PlanarPoint] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[PlanarPoint] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def segment_bearing(s: Segment) -> float:
    """Planar direction of a->b in degrees from the +x axis, in [0, 360)."""
    deg = math.degrees(math.atan2(s.b.y - s.a.y, s.b.x - s.a.x))
    return deg % 360.0


def _acute_between(bearing1: float, bearing2: float) -> float:
    d = abs(bearing1 - bearing2) % 180.0
    return min(d, 180.0 - d)


def polyline_min_angle(u: Polyline, v: Polyline) -> float:
    """Minimum undirected acute angle (degrees) over all segment pairs."""
    bearings_u = [segment_bearing(s) for s in u.segments()]
    bearings_v = [segment_bearing(s) for s in v.segments()]
    return min(_acute_between(bu, bv) for bu in bearings_u for bv in bearings_v)


def dominant_angle(u: Polyline, v: Polyline) -> float:
    """Acute angle between the length-weighted dominant orientations of two polylines."""

    def dominant_orientation(line: Polyline) -> float:
        sx = sy = 0.0
        for s in line.segments():
            theta = 2.0 * math.atan2(s.b.y - s.a.y, s.b.x - s.a.x)
            w = s.length()
            sx += w * math.cos(theta)
            sy += w * math.sin(theta)
        return math.degrees(math.atan2(sy, sx) / 2.0) % 180.0

    return _acute_between(dominant_orientation(u), dominant_orientation(v))


def segment_to_segment_distance(s1: Segment, s2: Segment) -> float:
    if segments_intersect(s1, s2):
        return 0.0
    return min(
        point_to_segment_distance(s1.a, s2),
        point_to_segment_distance(s1.b, s2),
        point_to_segment_distance(s2.a, s1),
        point_to_segment_distance(s2.b, s1),
    )


def polyline_min_distance(u: Polyline, v: Polyline) -> float:
    """Minimum distance over all segment pairs; 0 when the polylines touch."""
    best = math.inf
    segs_v = v.segments()
    for su in u.segments():
        for sv in segs_v:
            d = segment_to_segment_distance(su, sv)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best


def polylines_intersect(u: Polyline, v: Polyline) -> bool:
    """True when the two polylines share at least one point (closed sets)."""
    segs_v = v.segments()
    for su in u.segments():
        for sv in segs_v:
            if segments_intersect(su, sv):
                return True
    return False


def _ring_from_shapely(poly: _ShapelyPolygon) -> tuple[PlanarPoint, ...]:
    coords = list(poly.exterior.coords)[:-1]
    ring = tuple(PlanarPoint(x, y) for x, y in coords)
    if signed_ring_area(ring) < 0:
        ring = tuple(reversed(ring))
    return ring


def buffer_polyline(u: Polyline, w: float) -> SimplePolygon:
    """Round-capped buffer of width `w` around a polyline.

    Arcs are inscribed at BUFFER_QUAD_SEGS chords per quarter circle, so the
    polygon sits just inside the exact offset (vertex clearance >= w*cos(pi/64)).
    Interior holes (possible only for self-touching polylines) are dropped.
    """
    if w <= 0:
        raise ValidationError("buffer width must be > 0")
    raw = _ShapelyLineString(list(u.points)).buffer(w, quad_segs=BUFFER_QUAD_SEGS)
    if raw.geom_type == "MultiPolygon":  # pragma: no cover - buffers of a connected line are connected
        raw = max(raw.geoms, key=lambda g: g.area)
    return SimplePolygon(ring=_ring_from_shapely(raw))


def polygon_intersection_area(a: SimplePolygon, b: SimplePolygon) -> float:
    """Area of the intersection of two simple polygons."""
    pa = _ShapelyPolygon(list(a.ring))
    pb = _ShapelyPolygon(list(b.ring))
    if pa.equals(pb):
        return a.area()
    return pa.intersection(pb).area
