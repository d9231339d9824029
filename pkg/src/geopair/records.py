"""Line-oriented file formats: pair records, exchanges, refine records, instances, reports."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .candidates import PairRecord
from .errors import ParseError, ValidationError
from .features import FeatureVector
from .geo import Coordinate, LineStringFeature, validate_coordinate
from .synth import SyntheticInstance

SCHEMA_VERSION = "1"


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _geometry_to_feature(fid: str, geom: dict, crs_mode: str) -> LineStringFeature:
    if not isinstance(geom, dict) or geom.get("type") != "LineString":
        raise ParseError(f"pair geometry for {fid!r} must be a LineString")
    coords = []
    for pos in geom.get("coordinates") or []:
        c = Coordinate(float(pos[0]), float(pos[1]))
        validate_coordinate(c, crs_mode)
        coords.append(c)
    return LineStringFeature(id=fid, coords=tuple(coords))


def pair_to_dict(pair: PairRecord) -> dict:
    d: dict[str, Any] = {
        "pair_id": pair.pair_id,
        "left_id": pair.left_id,
        "right_id": pair.right_id,
        "left_geom": {
            "type": "LineString",
            "coordinates": [[c.lon, c.lat] for c in pair.left_geom.coords],
        },
        "right_geom": {
            "type": "LineString",
            "coordinates": [[c.lon, c.lat] for c in pair.right_geom.coords],
        },
    }
    if pair.label is not None:
        d["label"] = pair.label
    if pair.features is not None:
        d["features"] = pair.features.to_dict()
    return d


def pair_from_dict(d: dict, crs_mode: str = "geographic") -> PairRecord:
    try:
        features = None
        if "features" in d and d["features"] is not None:
            features = FeatureVector.from_dict(d["features"])
        label = d.get("label")
        return PairRecord(
            pair_id=str(d["pair_id"]),
            left_id=str(d["left_id"]),
            right_id=str(d["right_id"]),
            left_geom=_geometry_to_feature(str(d["left_id"]), d["left_geom"], crs_mode),
            right_geom=_geometry_to_feature(str(d["right_id"]), d["right_geom"], crs_mode),
            label=int(label) if label is not None else None,
            features=features,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad pair record: {exc}") from exc


def write_pairs(path: str | Path, pairs: Iterable[PairRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(_dumps(pair_to_dict(pair)) + "\n")


def read_pairs(path: str | Path, crs_mode: str = "geographic") -> list[PairRecord]:
    pairs: list[PairRecord] = []
    ids: set[str] = set()
    for lineno, line in enumerate(_read_lines(path), start=1):
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
        pair = pair_from_dict(d, crs_mode)
        if pair.pair_id in ids:
            raise ValidationError(f"{path}:{lineno}: duplicate pair_id {pair.pair_id!r}")
        ids.add(pair.pair_id)
        pairs.append(pair)
    return pairs


def _read_lines(path: str | Path) -> Iterable[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    for line in text.splitlines():
        if line.strip():
            yield line


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(_dumps(row) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    rows: list[dict] = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
    return rows


def write_instances(path: str | Path, instances: Iterable[SyntheticInstance]) -> None:
    write_jsonl(path, (inst.to_dict() for inst in instances))


def read_instances(path: str | Path) -> list[SyntheticInstance]:
    return [SyntheticInstance.from_dict(d) for d in read_jsonl(path)]


def read_answers(path: str | Path) -> dict[str, object]:
    answers: dict[str, object] = {}
    for row in read_jsonl(path):
        if "instance_id" not in row:
            raise ParseError(f"{path}: answer rows need an instance_id")
        answers[str(row["instance_id"])] = row.get("answer")
    return answers


def round_sig(value: float, digits: int = 6) -> float:
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def config_hash(config: dict) -> str:
    return hashlib.sha256(_dumps(config).encode("utf-8")).hexdigest()[:16]


def write_report(path: str | Path, kind: str, payload: dict, config: dict | None = None) -> dict:
    """Write a stable report JSON: schema version, config hash, 6-significant-digit floats."""
    config = config or {}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": _round_floats(config),
        "config_hash": config_hash(config),
    }
    doc.update(_round_floats(payload))
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return doc


def read_report(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read report {path}: {exc}") from exc
