"""Thresholded pair classifiers, duo/trio conjunctions, grid sweeps, accuracy reports."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

from .candidates import PairRecord
from .errors import ValidationError
from .features import FeatureVector

PARALLEL = "p"
CLEARANCE = "c"
OVERLAP = "o"
KIND_ORDER = (PARALLEL, CLEARANCE, OVERLAP)
KIND_NAMES = {PARALLEL: "parallel", CLEARANCE: "clearance", OVERLAP: "overlap"}

JOIN = "join"
UNION = "union"
TASKS = (JOIN, UNION)

# Kinds applicable per task: union candidates always intersect, so clearance is join-only.
TASK_KINDS = {JOIN: (PARALLEL, CLEARANCE, OVERLAP), UNION: (PARALLEL, OVERLAP)}

DEFAULT_GRIDS = {
    JOIN: {
        PARALLEL: (1.0, 2.0, 5.0, 10.0, 20.0),
        CLEARANCE: (1.0, 2.0, 3.0, 4.0, 5.0),
        OVERLAP: (0.1, 0.2, 0.3, 0.4, 0.5),
    },
    UNION: {
        PARALLEL: (1.0, 2.0, 3.0, 4.0, 5.0),
        OVERLAP: (0.5, 0.6, 0.7, 0.8, 0.9),
    },
}


def _validate_term(kind: str, alpha: float) -> None:
    if kind not in KIND_ORDER:
        raise ValidationError(f"unknown heuristic kind {kind!r}")
    if kind == OVERLAP:
        if not (0.0 < alpha <= 1.0):
            raise ValidationError(f"overlap threshold {alpha} outside (0, 1]")
    elif alpha <= 0.0:
        raise ValidationError(f"{KIND_NAMES[kind]} threshold {alpha} must be > 0")


@dataclass(frozen=True)
class HeuristicSpec:
    """A conjunction of thresholded predicates, one term per kind."""

    terms: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not (1 <= len(self.terms) <= 3):
            raise ValidationError("spec needs 1 to 3 terms")
        kinds = [k for k, _ in self.terms]
        if len(set(kinds)) != len(kinds):
            raise ValidationError("spec kinds must be distinct")
        for kind, alpha in self.terms:
            _validate_term(kind, float(alpha))
        # Canonical term order keeps serialization and tie-breaking stable.
        ordered = tuple(sorted(self.terms, key=lambda t: KIND_ORDER.index(t[0])))
        object.__setattr__(self, "terms", ordered)

    def describe(self) -> str:
        parts = []
        for kind, alpha in self.terms:
            op = "<=" if kind == PARALLEL else ">="
            parts.append(f"{KIND_NAMES[kind]}{op}{alpha:g}")
        return " AND ".join(parts)

    def sort_key(self) -> tuple:
        return tuple((KIND_ORDER.index(k), a) for k, a in self.terms)

    def to_dict(self) -> dict[str, object]:
        return {"terms": [[k, a] for k, a in self.terms], "rule": self.describe()}

    @classmethod
    def from_dict(cls, d: dict) -> "HeuristicSpec":
        return cls(terms=tuple((str(k), float(a)) for k, a in d["terms"]))

    @classmethod
    def parse(cls, text: str) -> "HeuristicSpec":
        """Parse the compact CLI form, e.g. "p=5,c=2" or "o=0.4"."""
        terms = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise ValidationError(f"bad spec term {chunk!r}; expected kind=threshold")
            kind, _, alpha = chunk.partition("=")
            try:
                terms.append((kind.strip(), float(alpha)))
            except ValueError as exc:
                raise ValidationError(f"bad threshold in {chunk!r}") from exc
        return cls(terms=tuple(terms))


def predict(features: FeatureVector, spec: HeuristicSpec) -> int:
    """1 iff every term holds (closed inequalities at the thresholds)."""
    for kind, alpha in spec.terms:
        if kind == PARALLEL:
            ok = features.min_angle_deg <= alpha
        elif kind == CLEARANCE:
            ok = features.min_distance_m >= alpha
        else:
            ok = features.max_area >= alpha
        if not ok:
            return 0
    return 1


def enumerate_specs(
    task: str, grids: dict[str, Sequence[float]] | None = None
) -> list[HeuristicSpec]:
    """All single/duo/trio specs over the task's kinds, cross-product of thresholds."""
    if task not in TASKS:
        raise ValidationError(f"unknown task {task!r}")
    grids = {k: tuple(v) for k, v in (grids or DEFAULT_GRIDS[task]).items()}
    for kind, values in grids.items():
        if kind not in TASK_KINDS[task]:
            raise ValidationError(f"kind {kind!r} is not valid for the {task} task")
        if not values:
            raise ValidationError(f"empty threshold grid for kind {kind!r}")
        for alpha in values:
            _validate_term(kind, float(alpha))
    kinds = [k for k in KIND_ORDER if k in grids]
    specs: list[HeuristicSpec] = []
    for size in (1, 2, 3):
        for combo in combinations(kinds, size):
            for alphas in product(*(grids[k] for k in combo)):
                specs.append(HeuristicSpec(terms=tuple(zip(combo, alphas))))
    return specs


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    n: int

    def to_dict(self) -> dict[str, object]:
        return {
            "accuracy": self.accuracy,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "n": self.n,
        }


def evaluate(predictions: Sequence[int], labels: Sequence[int]) -> EvalReport:
    if len(predictions) != len(labels):
        raise ValidationError("predictions and labels must have equal length")
    if not predictions:
        raise ValidationError("cannot evaluate an empty set")
    tp = fp = tn = fn = 0
    for pred, gold in zip(predictions, labels):
        if pred not in (0, 1) or gold not in (0, 1):
            raise ValidationError("predictions and labels must be 0/1")
        if pred == 1 and gold == 1:
            tp += 1
        elif pred == 1 and gold == 0:
            fp += 1
        elif pred == 0 and gold == 0:
            tn += 1
        else:
            fn += 1
    n = len(predictions)
    return EvalReport(accuracy=(tp + tn) / n, tp=tp, fp=fp, tn=tn, fn=fn, n=n)


@dataclass(frozen=True)
class SweepResult:
    spec: HeuristicSpec
    accuracy: float


@dataclass(frozen=True)
class SweepReport:
    task: str
    results: tuple[SweepResult, ...]
    best_spec: HeuristicSpec
    best_accuracy: float
    n_pairs: int

    def worst(self) -> SweepResult:
        return min(self.results, key=lambda r: (r.accuracy, len(r.spec.terms), r.spec.sort_key()))

    def to_dict(self) -> dict[str, object]:
        return {
            "task": self.task,
            "n_pairs": self.n_pairs,
            "best_spec": self.best_spec.to_dict(),
            "best_accuracy": self.best_accuracy,
            "grid": [
                {"spec": r.spec.to_dict(), "accuracy": r.accuracy} for r in self.results
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        results = tuple(
            SweepResult(spec=HeuristicSpec.from_dict(g["spec"]), accuracy=float(g["accuracy"]))
            for g in d["grid"]
        )
        return cls(
            task=d["task"],
            results=results,
            best_spec=HeuristicSpec.from_dict(d["best_spec"]),
            best_accuracy=float(d["best_accuracy"]),
            n_pairs=int(d["n_pairs"]),
        )


def _require_featured_labeled(pairs: Iterable[PairRecord]) -> list[PairRecord]:
    out = list(pairs)
    if not out:
        raise ValidationError("cannot sweep an empty dataset")
    for p in out:
        if p.label is None:
            raise ValidationError(f"pair {p.pair_id} is unlabeled")
        if p.features is None:
            raise ValidationError(f"pair {p.pair_id} has no features")
    return out


def sweep(pairs: Iterable[PairRecord], specs: Sequence[HeuristicSpec], task: str = JOIN) -> SweepReport:
    """Score every spec; ties broken by fewer terms, then smaller thresholds (p,c,o order)."""
    data = _require_featured_labeled(pairs)
    labels = [p.label for p in data]
    results: list[SweepResult] = []
    for spec in specs:
        preds = [predict(p.features, spec) for p in data]
        correct = sum(1 for a, b in zip(preds, labels) if a == b)
        results.append(SweepResult(spec=spec, accuracy=correct / len(data)))
    best = min(results, key=lambda r: (-r.accuracy, len(r.spec.terms), r.spec.sort_key()))
    return SweepReport(
        task=task,
        results=tuple(results),
        best_spec=best.spec,
        best_accuracy=best.accuracy,
        n_pairs=len(data),
    )
