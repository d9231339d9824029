from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from geopair.geo import Coordinate, LineStringFeature
from geopair.synth import PlantedPairConfig, generate_planted_pairs

PLANTED_SEED = 11
PLANTED_N = 2000


def line_feature(fid: str, coords, **props) -> LineStringFeature:
    return LineStringFeature(
        id=fid,
        coords=tuple(Coordinate(float(x), float(y)) for x, y in coords),
        properties={k: str(v) for k, v in props.items()},
    )


def feature_collection(*features: dict) -> bytes:
    return json.dumps({"type": "FeatureCollection", "features": list(features)}).encode()


def linestring_feature_dict(coords, fid=None, properties=None) -> dict:
    f: dict = {
        "type": "Feature",
        "properties": properties or {},
        "geometry": {"type": "LineString", "coordinates": [list(c) for c in coords]},
    }
    if fid is not None:
        f["id"] = fid
    return f


@pytest.fixture(scope="session")
def planted_config() -> PlantedPairConfig:
    return PlantedPairConfig(n=PLANTED_N, seed=PLANTED_SEED)


@pytest.fixture(scope="session")
def planted_pairs(planted_config):
    return generate_planted_pairs(planted_config)


@pytest.fixture(scope="session")
def planted_small():
    return generate_planted_pairs(PlantedPairConfig(n=120, seed=5))


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {status}: {name}", flush=True)
