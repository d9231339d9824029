"""One-round review-and-refine: seed an answer, request a critique, then a final answer."""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .candidates import PairRecord
from .errors import BackendError, ValidationError
from .heuristics import EvalReport, HeuristicSpec, evaluate
from .heuristics import predict as heuristic_predict
from .llm import (
    REVIEW_MAX_TOKENS,
    Backend,
    ChatMessage,
    Exchange,
    GenerationParams,
    PromptSpec,
    TemplateSet,
    build_prompt_body,
    default_templates,
    parse_label,
)

RANDOM = "random"
HEURISTIC = "heuristic"


@dataclass(frozen=True)
class InitialSource:
    kind: str
    seed: int = 0
    spec: HeuristicSpec | None = None

    def __post_init__(self) -> None:
        if self.kind not in (RANDOM, HEURISTIC):
            raise ValidationError(f"unknown initial source {self.kind!r}")
        if self.kind == HEURISTIC and self.spec is None:
            raise ValidationError("heuristic initial source needs a spec")

    def to_dict(self) -> dict[str, object]:
        d: dict[str, object] = {"kind": self.kind}
        if self.kind == RANDOM:
            d["seed"] = self.seed
        else:
            d["spec"] = self.spec.to_dict()
        return d


@dataclass(frozen=True)
class RefineRecord:
    pair_id: str
    initial: int
    review: str | None
    final: int | None
    exchanges: tuple[Exchange, ...]
    error: str | None = None

    def to_dict(self) -> dict[str, object]:
        return {
            "pair_id": self.pair_id,
            "initial": self.initial,
            "review": self.review,
            "final": self.final,
            "exchanges": [e.to_dict() for e in self.exchanges],
            "error": self.error,
        }


def make_initial(pairs: Sequence[PairRecord], source: InitialSource) -> list[int]:
    """Seeded fair coin per pair, or the heuristic prediction per pair."""
    if source.kind == RANDOM:
        rng = random.Random(source.seed)
        return [rng.randint(0, 1) for _ in pairs]
    labels: list[int] = []
    for p in pairs:
        if p.features is None:
            raise ValidationError(f"pair {p.pair_id}: heuristic initialization needs features")
        labels.append(heuristic_predict(p.features, source.spec))
    return labels


def review_and_refine(
    pair: PairRecord,
    initial: int,
    spec: PromptSpec,
    backend: Backend,
    params: GenerationParams | None = None,
    fewshot: Sequence[PairRecord] | None = None,
    templates: TemplateSet | None = None,
) -> RefineRecord:
    """Two backend calls, no iteration: critique the initial answer, then answer again.

    Pass 2 repeats the full initial prompt plus the stated initial answer and the
    pass-1 review, and requests a bare 0/1.
    """
    if initial not in (0, 1):
        raise ValidationError("initial answer must be 0 or 1")
    templates = templates or default_templates()
    params = params or GenerationParams()
    review_params = replace(params, max_new_tokens=REVIEW_MAX_TOKENS)

    body = build_prompt_body(pair, spec, fewshot, templates)
    system = ChatMessage(role="system", content=templates.text("system.txt").strip())
    review_user = ChatMessage(
        role="user",
        content=body + "\n\n" + templates.render("review.txt", initial=str(initial)).strip(),
    )
    review_messages = [system, review_user]

    start = time.perf_counter()
    try:
        review_text = backend.complete(review_messages, review_params, key=pair.pair_id)
    except BackendError as exc:
        failed = Exchange(
            pair_id=pair.pair_id,
            request=tuple(review_messages),
            response=None,
            parsed=None,
            latency_s=0.0,
            backend=backend.backend_id,
            error=str(exc),
        )
        return RefineRecord(
            pair_id=pair.pair_id,
            initial=initial,
            review=None,
            final=None,
            exchanges=(failed,),
            error=f"review pass failed: {exc}",
        )
    deterministic = getattr(backend, "deterministic", False)
    review_latency = 0.0 if deterministic else time.perf_counter() - start
    review_exchange = Exchange(
        pair_id=pair.pair_id,
        request=tuple(review_messages),
        response=review_text,
        parsed=None,
        latency_s=round(review_latency, 6),
        backend=backend.backend_id,
    )

    refine_user = ChatMessage(
        role="user",
        content=(
            body
            + "\n\n"
            + templates.render("refine.txt", initial=str(initial), review=review_text).strip()
            + "\n\n"
            + templates.text("answer.txt").strip()
        ),
    )
    refine_messages = [system, refine_user]
    start = time.perf_counter()
    try:
        final_text = backend.complete(refine_messages, params, key=pair.pair_id)
    except BackendError as exc:
        failed = Exchange(
            pair_id=pair.pair_id,
            request=tuple(refine_messages),
            response=None,
            parsed=None,
            latency_s=0.0,
            backend=backend.backend_id,
            error=str(exc),
        )
        return RefineRecord(
            pair_id=pair.pair_id,
            initial=initial,
            review=review_text,
            final=None,
            exchanges=(review_exchange, failed),
            error=f"refine pass failed: {exc}",
        )
    final_latency = 0.0 if deterministic else time.perf_counter() - start
    final_exchange = Exchange(
        pair_id=pair.pair_id,
        request=tuple(refine_messages),
        response=final_text,
        parsed=parse_label(final_text),
        latency_s=round(final_latency, 6),
        backend=backend.backend_id,
    )
    return RefineRecord(
        pair_id=pair.pair_id,
        initial=initial,
        review=review_text,
        final=final_exchange.parsed,
        exchanges=(review_exchange, final_exchange),
    )


@dataclass
class RefineRunResult:
    records: list[RefineRecord]
    report: EvalReport | None
    parse_failures: int = 0


def run_refine(
    pairs: Sequence[PairRecord],
    source: InitialSource,
    spec: PromptSpec,
    backend: Backend,
    params: GenerationParams | None = None,
    fewshot: Sequence[PairRecord] | None = None,
    max_in_flight: int = 4,
    templates: TemplateSet | None = None,
) -> RefineRunResult:
    """Refine every pair; the two passes per pair stay strictly sequential."""
    if not pairs:
        raise ValidationError("run_refine needs at least one pair")
    initials = make_initial(pairs, source)
    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        records = list(
            pool.map(
                lambda job: review_and_refine(
                    job[0], job[1], spec, backend, params, fewshot, templates
                ),
                zip(pairs, initials),
            )
        )
    failures = sum(1 for r in records if r.final is None)
    preds: list[int] = []
    golds: list[int] = []
    for record, pair in zip(records, pairs):
        if pair.label is None:
            continue
        preds.append(record.final if record.final is not None else 1 - pair.label)
        golds.append(pair.label)
    report = evaluate(preds, golds) if preds else None
    return RefineRunResult(records=records, report=report, parse_failures=failures)
