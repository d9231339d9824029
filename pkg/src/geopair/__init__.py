"""geopair: decide whether geographic linestring pairs match.

Library layout mirrors the pipeline: geo (GeoJSON + projection), geometry
(planar primitives), features (pair features), candidates (pair generation),
heuristics (threshold classifiers and sweeps), llm (prompting backends),
refine (review-and-refine), synth (benchmark + planted fixtures), cli.
"""

from .candidates import PairRecord, SplitSpec, filter_roads, join_candidates, split_dataset, union_candidates
from .errors import BackendError, ConfigError, ExtentError, GeopairError, ParseError, ValidationError
from .features import FeatureConfig, FeatureVector, compute_features, compute_features_batch
from .geo import Coordinate, FeatureSet, LineStringFeature, PlanarPoint, haversine_m, parse_geojson, project_local, serialize_geojson, unproject_local
from .heuristics import EvalReport, HeuristicSpec, SweepReport, enumerate_specs, evaluate, predict, sweep
from .llm import ChatMessage, Exchange, GenerationParams, HttpBackend, MockBackend, PromptSpec, build_prompt, complete, parse_label, run_inference
from .refine import InitialSource, RefineRecord, make_initial, review_and_refine, run_refine
from .synth import PlantedPairConfig, SyntheticInstance, generate, generate_planted_pairs, grade

__version__ = "0.1.0"
