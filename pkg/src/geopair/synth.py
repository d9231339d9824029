"""Seeded synthetic data: unit-square geometry tasks and planted-rule pair fixtures."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from . import geometry
from .candidates import PairRecord
from .errors import ConfigError, ValidationError
from .features import FeatureConfig, FeatureVector, compute_features
from .geo import PLANAR, Coordinate, FeatureSet, LineStringFeature, PlanarPoint
from .heuristics import CLEARANCE, OVERLAP, PARALLEL, HeuristicSpec, predict

logger = logging.getLogger("geopair.synth")

P2S = "p2s"
SC = "sc"
SI = "si"
CH = "ch"
TASK_KINDS = (P2S, SC, SI, CH)

P2S_TOLERANCE = 1e-3
CH_COORD_TOLERANCE = 1e-9

# Resampling margins keep truth labels unambiguous under boundary conventions.
MIN_TRIANGLE_AREA = 0.01
MIN_SEGMENT_LENGTH = 0.05
MIN_POINT_SPACING = 0.02
COLLINEARITY_MARGIN = 1e-3
BOUNDARY_MARGIN = 1e-3


@dataclass(frozen=True)
class SyntheticInstance:
    instance_id: str
    kind: str
    payload: dict
    truth: object

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "kind": self.kind,
            "payload": self.payload,
            "truth": self.truth,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticInstance":
        return cls(
            instance_id=str(d["instance_id"]),
            kind=str(d["kind"]),
            payload=dict(d["payload"]),
            truth=d.get("truth"),
        )


def _pt(rng: random.Random) -> PlanarPoint:
    return PlanarPoint(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0))


def _segment(rng: random.Random) -> geometry.Segment:
    while True:
        a, b = _pt(rng), _pt(rng)
        if math.dist(a, b) >= MIN_SEGMENT_LENGTH:
            return geometry.Segment(a, b)


def _coords(*points: PlanarPoint) -> list[list[float]]:
    return [[p.x, p.y] for p in points]


def _gen_p2s(rng: random.Random) -> tuple[dict, float]:
    seg = _segment(rng)
    p = _pt(rng)
    truth = geometry.point_to_segment_distance(p, seg)
    return {"point": [p.x, p.y], "segment": _coords(seg.a, seg.b)}, truth


def _gen_sc(rng: random.Random) -> tuple[dict, bool]:
    while True:
        a, b, c = _pt(rng), _pt(rng), _pt(rng)
        area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
        if abs(area2) / 2.0 >= MIN_TRIANGLE_AREA:
            break
    edges = [geometry.Segment(a, b), geometry.Segment(b, c), geometry.Segment(c, a)]
    while True:
        p = _pt(rng)
        if min(geometry.point_to_segment_distance(p, e) for e in edges) >= BOUNDARY_MARGIN:
            break
    truth = geometry.point_in_triangle(p, (a, b, c))
    return {"triangle": _coords(a, b, c), "point": [p.x, p.y]}, truth


def _crossing_is_robust(s1: geometry.Segment, s2: geometry.Segment) -> bool:
    def line_distances(base: geometry.Segment, other: geometry.Segment) -> tuple[float, float]:
        dx, dy = base.b.x - base.a.x, base.b.y - base.a.y
        norm = math.hypot(dx, dy)
        da = ((other.a.x - base.a.x) * dy - (other.a.y - base.a.y) * dx) / norm
        db = ((other.b.x - base.a.x) * dy - (other.b.y - base.a.y) * dx) / norm
        return da, db

    for base, other in ((s1, s2), (s2, s1)):
        da, db = line_distances(base, other)
        if da * db >= 0 or min(abs(da), abs(db)) < BOUNDARY_MARGIN:
            return False
    return True


def _gen_si(rng: random.Random) -> tuple[dict, bool]:
    while True:
        s1, s2 = _segment(rng), _segment(rng)
        if geometry.segments_intersect(s1, s2):
            if _crossing_is_robust(s1, s2):
                truth = True
                break
        elif geometry.segment_to_segment_distance(s1, s2) >= BOUNDARY_MARGIN:
            truth = False
            break
    return {"segment1": _coords(s1.a, s1.b), "segment2": _coords(s2.a, s2.b)}, truth


def _gen_ch(rng: random.Random) -> tuple[dict, list[list[float]]]:
    while True:
        count = rng.randint(5, 10)
        points: list[PlanarPoint] = []
        ok = True
        for _ in range(count):
            for _attempt in range(200):
                p = _pt(rng)
                if all(math.dist(p, q) >= MIN_POINT_SPACING for q in points):
                    points.append(p)
                    break
            else:
                ok = False
                break
        if not ok:
            continue
        if _collinearity_margin(points) >= COLLINEARITY_MARGIN:
            break
    hull = geometry.convex_hull(points)
    return {"points": _coords(*points)}, _coords(*hull)


def _collinearity_margin(points: Sequence[PlanarPoint]) -> float:
    worst = math.inf
    n = len(points)
    for i in range(n):
        for j in range(i + 1, n):
            seg_len = math.dist(points[i], points[j])
            for k in range(n):
                if k in (i, j):
                    continue
                cross = (points[j].x - points[i].x) * (points[k].y - points[i].y) - (
                    points[j].y - points[i].y
                ) * (points[k].x - points[i].x)
                worst = min(worst, abs(cross) / seg_len)
    return worst


_GENERATORS = {P2S: _gen_p2s, SC: _gen_sc, SI: _gen_si, CH: _gen_ch}


def generate(kind: str, n: int, seed: int) -> list[SyntheticInstance]:
    """Seeded unit-square instances; degenerate draws are resampled away."""
    if kind not in TASK_KINDS:
        raise ValidationError(f"unknown synthetic task {kind!r}")
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = random.Random(f"{kind}:{seed}")
    out: list[SyntheticInstance] = []
    for i in range(n):
        payload, truth = _GENERATORS[kind](rng)
        out.append(
            SyntheticInstance(instance_id=f"{kind}-{i:04d}", kind=kind, payload=payload, truth=truth)
        )
    return out


@dataclass(frozen=True)
class KindGrade:
    n: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.n if self.n else 0.0


@dataclass(frozen=True)
class GradeReport:
    per_kind: dict[str, KindGrade]

    def to_dict(self) -> dict:
        kinds = {
            k: {"n": g.n, "correct": g.correct, "accuracy": g.accuracy}
            for k, g in sorted(self.per_kind.items())
        }
        total = sum(g.n for g in self.per_kind.values())
        correct = sum(g.correct for g in self.per_kind.values())
        return {
            "per_kind": kinds,
            "overall": {
                "n": total,
                "correct": correct,
                "accuracy": correct / total if total else 0.0,
            },
        }


def _grade_one(instance: SyntheticInstance, answer: object) -> bool:
    if instance.kind == P2S:
        if isinstance(answer, bool) or not isinstance(answer, (int, float)):
            raise ValueError("p2s answer must be a number")
        return abs(float(answer) - float(instance.truth)) <= P2S_TOLERANCE
    if instance.kind in (SC, SI):
        if isinstance(answer, bool):
            return answer == bool(instance.truth)
        if answer in (0, 1):
            return bool(answer) == bool(instance.truth)
        raise ValueError(f"{instance.kind} answer must be a boolean")
    if instance.kind == CH:
        if not isinstance(answer, (list, tuple)):
            raise ValueError("ch answer must be a list of points")
        got = [(float(p[0]), float(p[1])) for p in answer]
        want = [(float(p[0]), float(p[1])) for p in instance.truth]
        if len(got) != len(want):
            return False
        got.sort()
        want.sort()
        return all(
            abs(g[0] - w[0]) <= CH_COORD_TOLERANCE and abs(g[1] - w[1]) <= CH_COORD_TOLERANCE
            for g, w in zip(got, want)
        )
    raise ValidationError(f"unknown synthetic task {instance.kind!r}")


def grade(instances: Sequence[SyntheticInstance], answers: dict[str, object]) -> GradeReport:
    """Score answers keyed by instance_id; missing or malformed answers count wrong."""
    counts: dict[str, list[int]] = {}
    for instance in instances:
        n_correct = counts.setdefault(instance.kind, [0, 0])
        n_correct[0] += 1
        if instance.instance_id not in answers:
            continue
        try:
            ok = _grade_one(instance, answers[instance.instance_id])
        except (ValueError, TypeError, IndexError) as exc:
            logger.warning("malformed answer for %s: %s", instance.instance_id, exc)
            continue
        if ok:
            n_correct[1] += 1
    return GradeReport(
        per_kind={k: KindGrade(n=v[0], correct=v[1]) for k, v in counts.items()}
    )


# ---------------------------------------------------------------------------
# Planted-rule pair fixtures
# ---------------------------------------------------------------------------

DEFAULT_PLANTED_RULE = HeuristicSpec(terms=((PARALLEL, 5.0), (CLEARANCE, 2.0)))

# Sidewalks must stay inside the 10 m candidate buffer to survive regeneration.
MAX_PLANTED_DISTANCE_M = 8.0
MIN_PLANTED_DISTANCE_M = 0.15


@dataclass(frozen=True)
class PlantedPairConfig:
    n: int
    rule: HeuristicSpec = DEFAULT_PLANTED_RULE
    seed: int = 0
    margin_angle_deg: float = 0.5
    margin_distance_m: float = 0.5
    margin_overlap: float = 0.05
    noise_m: float = 0.3
    positive_rate: float = 0.5
    spacing_m: float = 1000.0
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValidationError("n must be >= 0")
        if min(self.margin_angle_deg, self.margin_distance_m, self.margin_overlap) <= 0:
            raise ValidationError("label margins must be > 0")
        if not (0.0 < self.positive_rate < 1.0):
            raise ValidationError("positive_rate must be in (0, 1)")

    def margin(self, kind: str) -> float:
        return {
            PARALLEL: self.margin_angle_deg,
            CLEARANCE: self.margin_distance_m,
            OVERLAP: self.margin_overlap,
        }[kind]


def _windows(cfg: PlantedPairConfig) -> dict[str, tuple[tuple[float, float], tuple[float, float]]]:
    """Per rule kind: (satisfy window, violate window) for the driving quantity."""
    windows: dict[str, tuple[tuple[float, float], tuple[float, float]]] = {}
    for kind, alpha in cfg.rule.terms:
        m = cfg.margin(kind)
        if kind == PARALLEL:
            if alpha - m <= 0:
                raise ConfigError("angle margin leaves no room below the threshold")
            windows[kind] = ((0.0, alpha - m), (alpha + m, min(80.0, alpha + m + 40.0)))
        elif kind == CLEARANCE:
            lo_violate = MIN_PLANTED_DISTANCE_M
            if alpha - m <= lo_violate:
                raise ConfigError("distance margin leaves no room below the threshold")
            if alpha + m >= MAX_PLANTED_DISTANCE_M:
                raise ConfigError("distance threshold too close to the candidate buffer")
            windows[kind] = ((alpha + m, MAX_PLANTED_DISTANCE_M), (lo_violate, alpha - m))
        else:
            if alpha - m <= 0.0 or alpha + m > 1.0:
                raise ConfigError("overlap margin leaves no room around the threshold")
            windows[kind] = ((alpha + m, 1.0), (0.0, alpha - m))
    return windows


@dataclass(frozen=True)
class _PairShape:
    """Shape randomness of one planted pair; only the offset distance stays free."""

    theta: float
    length: float
    walk_len: float
    angle: float
    side: float
    shift: float
    bump: float

    def realize(self, center: PlanarPoint, distance_m: float) -> tuple[list[PlanarPoint], list[PlanarPoint]]:
        hx = math.cos(self.theta) * self.length / 2.0
        hy = math.sin(self.theta) * self.length / 2.0
        road = [
            PlanarPoint(center.x - hx, center.y - hy),
            PlanarPoint(center.x + hx, center.y + hy),
        ]
        # Rotating the sidewalk dips one end toward the road; offset for the worst case.
        offset = distance_m + self.walk_len / 2.0 * abs(math.sin(self.angle))
        nx, ny = -math.sin(self.theta) * self.side, math.cos(self.theta) * self.side
        cx = center.x + nx * offset + math.cos(self.theta) * self.shift
        cy = center.y + ny * offset + math.sin(self.theta) * self.shift
        wtheta = self.theta + self.angle
        wx = math.cos(wtheta) * self.walk_len / 2.0
        wy = math.sin(wtheta) * self.walk_len / 2.0
        ends = [PlanarPoint(cx - wx, cy - wy), PlanarPoint(cx + wx, cy + wy)]
        if self.bump == 0.0:
            return ends, road
        mid = PlanarPoint(
            (ends[0].x + ends[1].x) / 2.0 + nx * self.bump,
            (ends[0].y + ends[1].y) / 2.0 + ny * self.bump,
        )
        return [ends[0], mid, ends[1]], road


def _draw_shape(rng: random.Random, angle_deg: float, noise_m: float) -> _PairShape:
    length = rng.uniform(40.0, 80.0)
    # Short sidewalks keep high overlap ratios reachable even at larger angles.
    return _PairShape(
        theta=math.radians(rng.uniform(0.0, 180.0)),
        length=length,
        walk_len=rng.uniform(0.15, 0.9) * length,
        angle=math.radians(angle_deg) * rng.choice((-1.0, 1.0)),
        side=rng.choice((-1.0, 1.0)),
        shift=rng.uniform(-0.15, 0.15) * length,
        bump=rng.uniform(-noise_m, noise_m) if noise_m > 0 else 0.0,
    )


def _margins_hold(fv: FeatureVector, cfg: PlantedPairConfig) -> bool:
    values = {
        PARALLEL: fv.min_angle_deg,
        CLEARANCE: fv.min_distance_m,
        OVERLAP: fv.max_area,
    }
    return all(abs(values[k] - alpha) >= cfg.margin(k) for k, alpha in cfg.rule.terms)


def _feature(points: list[PlanarPoint], fid: str, props: dict[str, str]) -> LineStringFeature:
    return LineStringFeature(
        id=fid, coords=tuple(Coordinate(p.x, p.y) for p in points), properties=props
    )


def generate_planted_pairs(cfg: PlantedPairConfig) -> list[PairRecord]:
    """Labeled planar pairs whose labels are exactly reproduced by the planted rule.

    Positives satisfy every rule term with margin; each negative violates a
    rotating nonempty subset of terms with margin. Pairs sit on a sparse grid so
    regenerating candidates with the default join buffer recovers exactly them.
    """
    windows = _windows(cfg)
    rule_kinds = [k for k, _ in cfg.rule.terms]
    violate_subsets: list[tuple[str, ...]] = []
    for mask in range(1, 2 ** len(rule_kinds)):
        violate_subsets.append(
            tuple(k for bit, k in enumerate(rule_kinds) if mask & (1 << bit))
        )

    rng = random.Random(f"planted:{cfg.seed}")
    grid = max(1, math.ceil(math.sqrt(max(cfg.n, 1))))
    pairs: list[PairRecord] = []
    negative_cursor = 0
    for i in range(cfg.n):
        center = PlanarPoint((i % grid) * cfg.spacing_m, (i // grid) * cfg.spacing_m)
        positive = rng.random() < cfg.positive_rate
        if positive:
            violated: tuple[str, ...] = ()
        else:
            violated = violate_subsets[negative_cursor % len(violate_subsets)]
            negative_cursor += 1
        record = _realize_pair(rng, cfg, windows, center, i, violated)
        pairs.append(record)
    return pairs


def _target_in(window: tuple[float, float], rng: random.Random) -> float:
    return rng.uniform(window[0], window[1])


def _realize_pair(
    rng: random.Random,
    cfg: PlantedPairConfig,
    windows: dict[str, tuple[tuple[float, float], tuple[float, float]]],
    center: PlanarPoint,
    index: int,
    violated: tuple[str, ...],
) -> PairRecord:
    label = 0 if violated else 1
    rule_kinds = {k for k, _ in cfg.rule.terms}
    for _attempt in range(120):
        if PARALLEL in rule_kinds:
            window = windows[PARALLEL][1] if PARALLEL in violated else windows[PARALLEL][0]
            angle = _target_in(window, rng)
        else:
            angle = rng.uniform(0.0, 3.0)
        shape = _draw_shape(rng, angle, cfg.noise_m)

        if OVERLAP in rule_kinds:
            o_window = windows[OVERLAP][1] if OVERLAP in violated else windows[OVERLAP][0]
            distance = _distance_for_overlap(shape, cfg, center, _target_in(o_window, rng))
            if distance is None:
                continue
        elif CLEARANCE in rule_kinds:
            window = windows[CLEARANCE][1] if CLEARANCE in violated else windows[CLEARANCE][0]
            distance = _target_in(window, rng)
        else:
            distance = rng.uniform(0.5, 7.0)

        walk_pts, road_pts = shape.realize(center, distance)
        walk = _feature(walk_pts, f"w{index:05d}", {})
        road = _feature(road_pts, f"r{index:05d}", {"highway": "residential"})
        fv = compute_features(walk, road, cfg.feature_config, crs_mode=PLANAR)
        if predict(fv, cfg.rule) == label and _margins_hold(fv, cfg):
            return PairRecord(
                pair_id=f"{walk.id}__{road.id}",
                left_id=walk.id,
                right_id=road.id,
                left_geom=walk,
                right_geom=road,
                label=label,
                features=fv,
            )
    raise ConfigError(
        f"could not realize pair {index} for rule {cfg.rule.describe()}; margins may be infeasible"
    )


def _distance_for_overlap(
    shape: _PairShape, cfg: PlantedPairConfig, center: PlanarPoint, target: float
) -> float | None:
    """Bisect the offset distance of this exact shape until max_area hits `target`."""

    def overlap_at(d: float) -> float:
        walk_pts, road_pts = shape.realize(center, d)
        fv = compute_features(
            _feature(walk_pts, "probe_w", {}),
            _feature(road_pts, "probe_r", {}),
            cfg.feature_config,
            crs_mode=PLANAR,
        )
        return fv.max_area

    lo, hi = MIN_PLANTED_DISTANCE_M, 2.0 * cfg.feature_config.overlap_buffer_m + 1.0
    if not (overlap_at(hi) <= target <= overlap_at(lo)):
        return None
    for _ in range(40):
        mid = (lo + hi) / 2.0
        if overlap_at(mid) > target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def planted_feature_sets(pairs: Sequence[PairRecord]) -> tuple[FeatureSet, FeatureSet]:
    """Split planted pairs back into (sidewalks, roads) planar feature sets."""
    walks = tuple(p.left_geom for p in pairs)
    roads = tuple(p.right_geom for p in pairs)
    return (
        FeatureSet(features=walks, crs_mode=PLANAR),
        FeatureSet(features=roads, crs_mode=PLANAR),
    )
