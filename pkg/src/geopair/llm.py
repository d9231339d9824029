"""Prompt construction, chat-completion backends (HTTP and mock), and batch inference."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import requests

from .candidates import PairRecord
from .errors import BackendError, ConfigError, CredentialError, ValidationError
from .geo import geometry_dict
from .heuristics import (
    CLEARANCE,
    JOIN,
    KIND_ORDER,
    OVERLAP,
    PARALLEL,
    TASKS,
    UNION,
    EvalReport,
    evaluate,
)

logger = logging.getLogger("geopair.llm")

MODES = ("plain", "hints", "features")
SHOTS = ("zero", "few")

CLASSIFY_MAX_TOKENS = 10
REVIEW_MAX_TOKENS = 500
COT_MAX_TOKENS = 2000

PARSE_POLICIES = ("incorrect", "abstain")

TEMPLATE_FILES = (
    "system.txt",
    "task_join.txt",
    "task_union.txt",
    "hint_p.txt",
    "hint_c.txt",
    "hint_o.txt",
    "body.txt",
    "example.txt",
    "answer.txt",
    "review.txt",
    "refine.txt",
)

DEFAULT_KINDS = {JOIN: (PARALLEL, CLEARANCE, OVERLAP), UNION: (PARALLEL, OVERLAP)}


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValidationError(f"unknown chat role {self.role!r}")
        if not self.content:
            raise ValidationError("chat message content must be nonempty")

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    top_p: float = 1.0
    max_new_tokens: int = CLASSIFY_MAX_TOKENS

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if not (0.0 < self.top_p <= 1.0):
            raise ValidationError("top_p must be in (0, 1]")
        if self.max_new_tokens < 1:
            raise ValidationError("max_new_tokens must be >= 1")

    def to_dict(self) -> dict[str, object]:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_new_tokens": self.max_new_tokens,
        }


@dataclass(frozen=True)
class PromptSpec:
    task: str = JOIN
    mode: str = "plain"
    shots: str = "zero"
    heuristic_kinds: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown prompt mode {self.mode!r}")
        if self.shots not in SHOTS:
            raise ValidationError(f"unknown shots setting {self.shots!r}")
        if self.heuristic_kinds is not None:
            for k in self.heuristic_kinds:
                if k not in KIND_ORDER:
                    raise ValidationError(f"unknown heuristic kind {k!r}")

    def kinds(self) -> tuple[str, ...]:
        if self.mode == "plain":
            return ()
        if self.heuristic_kinds is None:
            return DEFAULT_KINDS[self.task]
        return tuple(k for k in KIND_ORDER if k in self.heuristic_kinds)

    def to_dict(self) -> dict[str, object]:
        return {
            "task": self.task,
            "mode": self.mode,
            "shots": self.shots,
            "heuristic_kinds": list(self.kinds()),
        }


@dataclass(frozen=True)
class Exchange:
    pair_id: str
    request: tuple[ChatMessage, ...]
    response: str | None
    parsed: int | None
    latency_s: float
    backend: str
    error: str | None = None

    def to_dict(self) -> dict[str, object]:
        return {
            "pair_id": self.pair_id,
            "request": [m.to_dict() for m in self.request],
            "response": self.response,
            "parsed": self.parsed,
            "latency_s": self.latency_s,
            "backend": self.backend,
            "error": self.error,
        }


class TemplateSet:
    """Prompt text lives in external files so wording can change without code changes."""

    def __init__(self, directory: str | Path | None = None):
        self._texts: dict[str, str] = {}
        for name in TEMPLATE_FILES:
            if directory is not None:
                path = Path(directory) / name
                if not path.is_file():
                    raise ConfigError(f"missing prompt template {path}")
                self._texts[name] = path.read_text(encoding="utf-8")
            else:
                ref = resources.files("geopair.templates").joinpath(name)
                if not ref.is_file():
                    raise ConfigError(f"missing packaged prompt template {name}")
                self._texts[name] = ref.read_text(encoding="utf-8")

    def render(self, name: str, **values: str) -> str:
        try:
            return self._texts[name].format(**values)
        except KeyError as exc:
            raise ConfigError(f"template {name} references unknown placeholder {exc}") from exc

    def text(self, name: str) -> str:
        return self._texts[name]


_default_templates: TemplateSet | None = None


def default_templates() -> TemplateSet:
    global _default_templates
    if _default_templates is None:
        _default_templates = TemplateSet()
    return _default_templates


def _geojson_text(pair_side) -> str:
    return json.dumps(geometry_dict(pair_side), sort_keys=True, separators=(",", ":"))


def _features_block(pair: PairRecord, kinds: Sequence[str]) -> str:
    if pair.features is None:
        raise ValidationError(f"pair {pair.pair_id}: features mode needs computed features")
    fv = pair.features
    lines = ["Geometric features computed for this pair:"]
    if PARALLEL in kinds:
        lines.append(f"- min_angle = {fv.min_angle_deg:.3f} degrees")
    if CLEARANCE in kinds:
        lines.append(f"- min_distance = {fv.min_distance_m:.3f} meters")
    if OVERLAP in kinds:
        lines.append(f"- max_area = {fv.max_area:.3f}")
    return "\n".join(lines) + "\n"


def _hints_block(kinds: Sequence[str], templates: TemplateSet) -> str:
    lines = ["Guidance on deciding:"]
    for k in kinds:
        lines.append("- " + templates.text(f"hint_{k}.txt").strip())
    return "\n".join(lines) + "\n\n"


def _order_fewshot(fewshot: Sequence[PairRecord]) -> tuple[PairRecord, PairRecord]:
    if len(fewshot) != 2:
        raise ValidationError("few-shot prompting needs exactly two exemplars")
    if sorted(p.label if p.label in (0, 1) else -1 for p in fewshot) != [0, 1]:
        raise ValidationError("few-shot exemplars must be one positive and one negative")
    positive = next(p for p in fewshot if p.label == 1)
    negative = next(p for p in fewshot if p.label == 0)
    return positive, negative


def _examples_block(
    fewshot: Sequence[PairRecord], spec: PromptSpec, templates: TemplateSet
) -> str:
    positive, negative = _order_fewshot(fewshot)
    blocks = []
    for ex in (positive, negative):
        feat = ""
        if spec.mode == "features":
            feat = _features_block(ex, spec.kinds())
        blocks.append(
            templates.render(
                "example.txt",
                geojson_left=_geojson_text(ex.left_geom),
                geojson_right=_geojson_text(ex.right_geom),
                features=feat,
                label=str(ex.label),
            ).strip()
        )
    return "\n\n".join(blocks) + "\n\n"


def build_prompt_body(
    pair: PairRecord,
    spec: PromptSpec,
    fewshot: Sequence[PairRecord] | None = None,
    templates: TemplateSet | None = None,
) -> str:
    """The shared prompt body: task text, optional hints/examples, geometries, features."""
    templates = templates or default_templates()
    task_description = templates.text(f"task_{spec.task}.txt").strip()
    hints = "" if spec.mode == "plain" else _hints_block(spec.kinds(), templates)
    features = ""
    if spec.mode == "features":
        features = _features_block(pair, spec.kinds())
    examples = ""
    if spec.shots == "few":
        if not fewshot:
            raise ValidationError("few-shot prompting needs exemplars")
        examples = _examples_block(fewshot, spec, templates)
    elif fewshot:
        raise ValidationError("exemplars supplied but shots=zero")
    return templates.render(
        "body.txt",
        task_description=task_description,
        hints=hints,
        examples=examples,
        geojson_left=_geojson_text(pair.left_geom),
        geojson_right=_geojson_text(pair.right_geom),
        features=features,
    ).rstrip()


def build_prompt(
    pair: PairRecord,
    spec: PromptSpec,
    fewshot: Sequence[PairRecord] | None = None,
    templates: TemplateSet | None = None,
) -> list[ChatMessage]:
    """Deterministic classification prompt ending in a bare-0/1 instruction."""
    templates = templates or default_templates()
    body = build_prompt_body(pair, spec, fewshot, templates)
    user = body + "\n\n" + templates.text("answer.txt").strip()
    return [
        ChatMessage(role="system", content=templates.text("system.txt").strip()),
        ChatMessage(role="user", content=user),
    ]


_LABEL_RE = re.compile(r"\b([01])\b")


def parse_label(text: str | None) -> int | None:
    """First standalone 0/1 token wins; None marks a parse failure."""
    if not text:
        return None
    match = _LABEL_RE.search(text)
    if match is None:
        return None
    return int(match.group(1))


class MockBackend:
    """Scripted backend for tests and offline runs.

    Responses are keyed by pair_id when the caller provides one, otherwise by a
    stable hash of the prompt. A script value may be a single string or a list
    consumed call by call (the last entry repeats once exhausted).
    """

    backend_id = "mock"
    deterministic = True

    def __init__(
        self,
        script: dict[str, str | list[str]] | None = None,
        default: str | None = None,
        responder: Callable[[str | None, Sequence[ChatMessage]], str] | None = None,
    ):
        self.script = dict(script or {})
        self.default = default
        self.responder = responder
        self.calls: list[tuple[str | None, tuple[ChatMessage, ...]]] = []
        self._counts: dict[str, int] = {}
        self._lock = threading.Lock()

    @staticmethod
    def prompt_key(messages: Sequence[ChatMessage]) -> str:
        digest = hashlib.sha256()
        for m in messages:
            digest.update(m.role.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(m.content.encode("utf-8"))
            digest.update(b"\x00")
        return digest.hexdigest()

    def complete(
        self,
        messages: Sequence[ChatMessage],
        params: GenerationParams,
        key: str | None = None,
    ) -> str:
        with self._lock:
            self.calls.append((key, tuple(messages)))
            if self.responder is not None:
                return self.responder(key, messages)
            lookup = key if key is not None and key in self.script else self.prompt_key(messages)
            entry = self.script.get(lookup, self.default)
            if entry is None:
                raise BackendError(f"mock backend has no response for key {lookup!r}")
            if isinstance(entry, list):
                if not entry:
                    raise BackendError(f"mock backend has an empty script for key {lookup!r}")
                idx = self._counts.get(lookup, 0)
                self._counts[lookup] = idx + 1
                return entry[min(idx, len(entry) - 1)]
            return entry

    @classmethod
    def from_file(cls, path: str | Path, default: str | None = None) -> "MockBackend":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read mock script {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("mock script must be a JSON object of pair_id -> response")
        return cls(script=raw, default=default)


class HttpBackend:
    """OpenAI-compatible chat-completions client with retry and backoff."""

    deterministic = False

    RETRY_ATTEMPTS = 5
    BACKOFF_BASE_S = 1.0
    BACKOFF_FACTOR = 2.0

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout_s: float = 60.0,
        min_interval_s: float = 0.0,
        session: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        if not base_url:
            raise ConfigError("HTTP backend needs a base URL")
        if not model:
            raise ConfigError("HTTP backend needs a model name")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout_s = timeout_s
        self.min_interval_s = min_interval_s
        self.session = session or requests.Session()
        self.sleeper = sleeper
        self._rate_lock = threading.Lock()
        self._last_request = 0.0

    @property
    def backend_id(self) -> str:
        return f"http:{self.model}"

    @classmethod
    def from_env(cls, **kwargs) -> "HttpBackend":
        base = os.environ.get("LLM_API_BASE", "")
        model = os.environ.get("LLM_MODEL", "")
        key = os.environ.get("LLM_API_KEY", "")
        if not base or not model:
            raise ConfigError("set LLM_API_BASE and LLM_MODEL to use the HTTP backend")
        return cls(base_url=base, model=model, api_key=key, **kwargs)

    def _throttle(self) -> None:
        if self.min_interval_s <= 0:
            return
        with self._rate_lock:
            wait = self._last_request + self.min_interval_s - time.monotonic()
            if wait > 0:
                self.sleeper(wait)
            self._last_request = time.monotonic()

    def complete(
        self,
        messages: Sequence[ChatMessage],
        params: GenerationParams,
        key: str | None = None,
    ) -> str:
        body = {
            "model": self.model,
            "messages": [m.to_dict() for m in messages],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_new_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"

        delay = self.BACKOFF_BASE_S
        last_error: str = "no attempts made"
        last_status: int | None = None
        for attempt in range(1, self.RETRY_ATTEMPTS + 1):
            self._throttle()
            try:
                resp = self.session.post(url, json=body, headers=headers, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                last_status = None
            else:
                if resp.status_code in (401, 403):
                    raise CredentialError(
                        f"backend rejected credentials (HTTP {resp.status_code})",
                        status=resp.status_code,
                    )
                if resp.status_code == 200:
                    return self._extract_text(resp)
                last_error = f"HTTP {resp.status_code}"
                last_status = resp.status_code
                if not (resp.status_code == 429 or resp.status_code >= 500):
                    raise BackendError(f"backend request failed: {last_error}", status=last_status)
            if attempt < self.RETRY_ATTEMPTS:
                logger.warning("attempt %d/%d failed (%s); retrying in %.1fs",
                               attempt, self.RETRY_ATTEMPTS, last_error, delay)
                self.sleeper(delay)
                delay *= self.BACKOFF_FACTOR
        raise BackendError(
            f"backend request failed after {self.RETRY_ATTEMPTS} attempts: {last_error}",
            status=last_status,
        )

    @staticmethod
    def _extract_text(resp: requests.Response) -> str:
        try:
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected response shape: {exc}") from exc


Backend = MockBackend | HttpBackend


def complete(
    messages: Sequence[ChatMessage],
    params: GenerationParams,
    backend: Backend,
    key: str | None = None,
) -> str:
    return backend.complete(messages, params, key=key)


@dataclass
class InferenceResult:
    exchanges: list[Exchange]
    report: EvalReport | None
    parse_failures: int = 0


def _run_one(
    pair: PairRecord,
    spec: PromptSpec,
    params: GenerationParams,
    backend: Backend,
    fewshot: Sequence[PairRecord] | None,
    templates: TemplateSet | None,
) -> Exchange:
    messages = build_prompt(pair, spec, fewshot, templates)
    start = time.perf_counter()
    try:
        text = backend.complete(messages, params, key=pair.pair_id)
    except CredentialError:
        raise  # retrying other pairs cannot help; abort the run
    except BackendError as exc:
        return Exchange(
            pair_id=pair.pair_id,
            request=tuple(messages),
            response=None,
            parsed=None,
            latency_s=0.0,
            backend=backend.backend_id,
            error=str(exc),
        )
    latency = 0.0 if getattr(backend, "deterministic", False) else time.perf_counter() - start
    return Exchange(
        pair_id=pair.pair_id,
        request=tuple(messages),
        response=text,
        parsed=parse_label(text),
        latency_s=round(latency, 6),
        backend=backend.backend_id,
    )


def score_exchanges(
    exchanges: Sequence[Exchange],
    pairs: Sequence[PairRecord],
    parse_policy: str = "incorrect",
) -> tuple[EvalReport | None, int]:
    """Accuracy over parsed labels; failures count as wrong (default) or abstain."""
    if parse_policy not in PARSE_POLICIES:
        raise ValidationError(f"unknown parse policy {parse_policy!r}")
    failures = sum(1 for e in exchanges if e.parsed is None)
    labeled = [(e, p) for e, p in zip(exchanges, pairs) if p.label is not None]
    if not labeled:
        return None, failures
    preds: list[int] = []
    golds: list[int] = []
    for exchange, pair in labeled:
        if exchange.parsed is None:
            if parse_policy == "abstain":
                continue
            preds.append(1 - pair.label)
        else:
            preds.append(exchange.parsed)
        golds.append(pair.label)
    if not preds:
        return None, failures
    return evaluate(preds, golds), failures


def run_inference(
    pairs: Sequence[PairRecord],
    spec: PromptSpec,
    params: GenerationParams,
    backend: Backend,
    fewshot: Sequence[PairRecord] | None = None,
    max_in_flight: int = 4,
    parse_policy: str = "incorrect",
    templates: TemplateSet | None = None,
) -> InferenceResult:
    """One exchange per pair, bounded concurrency, results in input order."""
    if not pairs:
        raise ValidationError("run_inference needs at least one pair")
    if max_in_flight < 1:
        raise ValidationError("max_in_flight must be >= 1")
    if spec.mode == "features":
        for p in pairs:
            if p.features is None:
                raise ValidationError(f"pair {p.pair_id} has no features; run the features step first")
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        exchanges = list(
            pool.map(lambda p: _run_one(p, spec, params, backend, fewshot, templates), pairs)
        )
    if all(e.error is not None for e in exchanges):
        raise BackendError(f"backend failed on every pair: {exchanges[0].error}")
    report, failures = score_exchanges(exchanges, pairs, parse_policy)
    return InferenceResult(exchanges=exchanges, report=report, parse_failures=failures)


def pick_fewshot(
    pool: Sequence[PairRecord],
    positive_id: str | None = None,
    negative_id: str | None = None,
) -> tuple[PairRecord, PairRecord]:
    """First positive and first negative by pair_id order, unless ids are given."""
    by_id = {p.pair_id: p for p in pool}
    ordered = sorted(pool, key=lambda p: p.pair_id)

    def find(label: int, wanted: str | None) -> PairRecord:
        if wanted is not None:
            if wanted not in by_id:
                raise ValidationError(f"exemplar id {wanted!r} not in the pool")
            record = by_id[wanted]
            if record.label != label:
                raise ValidationError(f"exemplar {wanted!r} does not have label {label}")
            return record
        for p in ordered:
            if p.label == label:
                return p
        raise ValidationError(f"no exemplar with label {label} in the pool")

    return find(1, positive_id), find(0, negative_id)
