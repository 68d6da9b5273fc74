"""Single choke point for language-model calls.

Every stage goes through :class:`Gateway.complete_structured`, which renders
to a provider, parses the reply against the stage's response schema, runs
one repair round-trip per configured retry (the validation error is appended
to the prompt), and raises a typed stage error when the provider keeps
failing.  No other module performs network I/O.

The scripted mock provider replays canned structured responses keyed by
(stage, match key).  The match key is a hash of the prompt-relevant inputs,
so fixture files can be written by hand; see :func:`match_key`.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx
from jinja2 import Environment, StrictUndefined, meta
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .models import AnalysisResult, PanelSlot, SceneElement


class Stage(str, Enum):
    EVENT_EXTRACT = "event_extract"
    QUESTION_ARTICULATION = "question_articulation"
    STORY_ANALYZE = "story_analyze"
    QUESTION_ELABORATION = "question_elaboration"
    RECONSTRUCT = "reconstruct"
    MODIFY = "modify"
    WRAPUP = "wrapup"
    TITLES = "titles"
    SCENE_ELEMENTS = "scene_elements"
    SCENE_TOPOLOGY = "scene_topology"


# ---------------------------------------------------------------------------
# response schemas


class EventsResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    events: list[str]


class QuestionResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    kind: str = "open"

    @model_validator(mode="after")
    def _known_kind(self) -> "QuestionResponse":
        if self.kind not in ("open", "options_in_text", "emotion"):
            raise ValueError(f"unknown question kind {self.kind!r}")
        if not self.text.strip():
            raise ValueError("question text empty")
        return self


class PanelsResponse(BaseModel):
    """Full replacement sentence lists; omitted slots stay untouched."""

    model_config = ConfigDict(extra="forbid")

    panels: dict[PanelSlot, list[str]]


class OutlineResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    outline: list[str]

    @model_validator(mode="after")
    def _non_empty(self) -> "OutlineResponse":
        if not self.outline or any(not line.strip() for line in self.outline):
            raise ValueError("outline lines must be non-empty")
        return self


class TextResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str


class TitlesResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    titles: list[str] = Field(min_length=3, max_length=3)

    @model_validator(mode="after")
    def _distinct_non_empty(self) -> "TitlesResponse":
        cleaned = [t.strip() for t in self.titles]
        if any(not t for t in cleaned):
            raise ValueError("titles must be non-empty")
        if len(set(cleaned)) != len(cleaned):
            raise ValueError("titles must be distinct")
        return self


class SceneElementsResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    setting: str | None = None
    elements: list[SceneElement]


class TopologyResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    adjacent: list[tuple[str, str]]


SCHEMAS: dict[str, type[BaseModel]] = {
    "events_v1": EventsResponse,
    "question_v1": QuestionResponse,
    "analysis_v1": AnalysisResult,
    "panels_v1": PanelsResponse,
    "outline_v1": OutlineResponse,
    "text_v1": TextResponse,
    "titles_v1": TitlesResponse,
    "scene_elements_v1": SceneElementsResponse,
    "scene_topology_v1": TopologyResponse,
}

STAGE_SCHEMAS: dict[Stage, frozenset[str]] = {
    Stage.EVENT_EXTRACT: frozenset({"events_v1"}),
    Stage.QUESTION_ARTICULATION: frozenset({"question_v1"}),
    Stage.STORY_ANALYZE: frozenset({"analysis_v1"}),
    Stage.QUESTION_ELABORATION: frozenset({"question_v1"}),
    Stage.RECONSTRUCT: frozenset({"panels_v1"}),
    Stage.MODIFY: frozenset({"outline_v1", "panels_v1"}),
    Stage.WRAPUP: frozenset({"text_v1"}),
    Stage.TITLES: frozenset({"titles_v1"}),
    Stage.SCENE_ELEMENTS: frozenset({"scene_elements_v1"}),
    Stage.SCENE_TOPOLOGY: frozenset({"scene_topology_v1"}),
}


# ---------------------------------------------------------------------------
# requests, config, errors


@dataclass(frozen=True)
class StageRequest:
    stage: Stage
    rendered_prompt: str
    response_schema_id: str
    # Inputs the scripted provider keys on; ignored by real providers.
    match_key: str = ""

    def __post_init__(self) -> None:
        allowed = STAGE_SCHEMAS[self.stage]
        if self.response_schema_id not in allowed:
            raise ValueError(
                f"schema {self.response_schema_id!r} not registered for stage "
                f"{self.stage.value} (allowed: {sorted(allowed)})"
            )


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    timeout_s: float = 30.0
    max_repair_retries: int = 1
    temperature: float = 0.0


class StageError(Exception):
    """Base for failures of one pipeline stage call."""

    def __init__(self, stage: Stage, message: str, attempts: int = 1):
        super().__init__(f"{stage.value}: {message}")
        self.stage = stage
        self.attempts = attempts


class StageTimeout(StageError):
    pass


class StageTransportError(StageError):
    pass


class StageSchemaError(StageError):
    pass


class MockScriptMiss(Exception):
    """A scripted provider had no entry for a requested call."""


def normalize_match_text(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().lower())


def match_key(stage: Stage | str, utterance: str, missing: list[str] | None = None) -> str:
    """Key for scripted responses.

    ``utterance`` is the latest adolescent turn text at call time,
    ``missing`` the missing-tag set known to the engine, as "SLOT:tag"
    strings (for example ``["B:cause", "E:emotion"]``).  Both are
    normalized, so hand-written fixtures do not need exact whitespace.
    """
    stage_value = stage.value if isinstance(stage, Stage) else stage
    tags = ",".join(sorted(normalize_match_text(t) for t in (missing or [])))
    blob = f"{stage_value}\n{normalize_match_text(utterance)}\n{tags}"
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# providers


class Provider(Protocol):
    def complete(self, request: StageRequest, prompt: str) -> str:
        """Return the raw model reply for a rendered prompt."""
        ...


class HttpChatProvider:
    """Chat-completion-style HTTP provider (system+user messages, JSON out)."""

    SYSTEM_MESSAGE = "Reply with a single JSON object and nothing else."

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(timeout=config.timeout_s, transport=transport)

    def complete(self, request: StageRequest, prompt: str) -> str:
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "response_format": {"type": "json_object"},
            "messages": [
                {"role": "system", "content": self.SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
        }
        try:
            response = self._client.post(self.config.endpoint, json=body, headers=headers)
            response.raise_for_status()
        except httpx.TimeoutException as exc:
            raise StageTimeout(request.stage, f"provider timeout: {exc}") from exc
        except httpx.HTTPError as exc:
            raise StageTransportError(request.stage, f"provider transport: {exc}") from exc
        try:
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise StageTransportError(
                request.stage, f"malformed provider envelope: {exc}"
            ) from exc


@dataclass
class MockCall:
    stage: Stage
    match_key: str
    prompt: str


class _ScriptEntry:
    def __init__(self, responses: list[Any]):
        if not responses:
            raise ValueError("script entry needs at least one response")
        self.responses = responses
        self.cursor = 0

    def next_raw(self) -> str:
        item = self.responses[min(self.cursor, len(self.responses) - 1)]
        self.cursor += 1
        if isinstance(item, dict) and set(item) == {"raw"}:
            return str(item["raw"])
        return json.dumps(item, ensure_ascii=False)


class ScriptedMockProvider:
    """Deterministic provider driven by a hand-writable script.

    Script shape (JSON file or dict)::

        {"entries": [
          {"stage": "event_extract",
           "match": {"utterance": "I played with Oliver.", "missing": []},
           "response": {"events": ["I played with Oliver."]}},
          {"stage": "story_analyze", "default": true,
           "responses": [{...}, {"raw": "not json"}, {...}]}
        ]}

    An entry matches by explicit ``key`` or by ``match`` (from which the key
    is derived, see :func:`match_key`); ``default: true`` entries answer any
    call of their stage with no keyed match.  ``responses`` are consumed in
    order and the last one repeats; ``{"raw": ...}`` is returned verbatim
    (useful for malformed-reply tests), anything else is JSON-encoded.
    """

    def __init__(self, script: dict[str, Any]):
        self._keyed: dict[tuple[str, str], _ScriptEntry] = {}
        self._defaults: dict[str, _ScriptEntry] = {}
        self.calls: list[MockCall] = []
        for entry in script.get("entries", []):
            stage = entry["stage"]
            if stage not in {s.value for s in Stage}:
                raise ValueError(f"unknown stage {stage!r} in mock script")
            responses = entry.get("responses")
            if responses is None:
                responses = [entry["response"]]
            parsed = _ScriptEntry(list(responses))
            if entry.get("default"):
                if stage in self._defaults:
                    raise ValueError(f"duplicate default entry for stage {stage}")
                self._defaults[stage] = parsed
            else:
                key = entry.get("key")
                if key is None:
                    m = entry["match"]
                    key = match_key(stage, m.get("utterance", ""), m.get("missing"))
                if (stage, key) in self._keyed:
                    raise ValueError(f"duplicate script entry for ({stage}, {key})")
                self._keyed[(stage, key)] = parsed
        self.unmatched: list[MockCall] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedMockProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def complete(self, request: StageRequest, prompt: str) -> str:
        call = MockCall(request.stage, request.match_key, prompt)
        self.calls.append(call)
        entry = self._keyed.get((request.stage.value, request.match_key))
        if entry is None:
            entry = self._defaults.get(request.stage.value)
        if entry is None:
            self.unmatched.append(call)
            raise MockScriptMiss(
                f"no scripted response for stage={request.stage.value} "
                f"key={request.match_key}"
            )
        return entry.next_raw()


class FailingProvider:
    """Raises a configured error every call; for error-path tests."""

    def __init__(self, error: type[StageError] = StageTimeout, message: str = "injected"):
        self.error = error
        self.message = message
        self.calls = 0

    def complete(self, request: StageRequest, prompt: str) -> str:
        self.calls += 1
        raise self.error(request.stage, self.message)


# ---------------------------------------------------------------------------
# prompt templates


STAGE_VARIABLES: dict[Stage, frozenset[str]] = {
    Stage.EVENT_EXTRACT: frozenset({"peer_name", "adolescent_name", "place", "people", "dialogue"}),
    Stage.QUESTION_ARTICULATION: frozenset(
        {"peer_name", "adolescent_name", "place", "people", "dialogue", "events"}
    ),
    Stage.STORY_ANALYZE: frozenset({"panels"}),
    Stage.QUESTION_ELABORATION: frozenset(
        {"peer_name", "dialogue", "panels", "target_slot", "target_tag", "focus"}
    ),
    Stage.RECONSTRUCT: frozenset({"panels", "question", "answer", "target_slot", "target_tag"}),
    Stage.MODIFY: frozenset({"target_kind", "current", "request"}),
    Stage.WRAPUP: frozenset({"peer_name", "panels", "emotions"}),
    Stage.TITLES: frozenset({"panels"}),
    Stage.SCENE_ELEMENTS: frozenset({"slot", "sentences", "place", "people"}),
    Stage.SCENE_TOPOLOGY: frozenset({"elements", "sentences"}),
}

TEMPLATE_ROOT = Path(__file__).parent / "templates"


class TemplateRegistry:
    """Loads one prompt template per stage per locale, validated at startup.

    A template that references a variable outside its stage's declared set
    fails here, at load time, never at render time.
    """

    def __init__(self, locale: str = "en", root: Path | None = None):
        self.locale = locale
        self.root = Path(root) if root is not None else TEMPLATE_ROOT
        self._env = Environment(undefined=StrictUndefined, keep_trailing_newline=False)
        self._templates = {}
        base = self.root / locale
        if not base.is_dir():
            raise FileNotFoundError(f"no templates for locale {locale!r} under {self.root}")
        for stage in Stage:
            path = base / f"{stage.value}.txt"
            if not path.is_file():
                raise FileNotFoundError(f"missing template {path}")
            source = path.read_text(encoding="utf-8")
            used = meta.find_undeclared_variables(self._env.parse(source))
            extra = used - STAGE_VARIABLES[stage]
            if extra:
                raise ValueError(
                    f"template {path.name} uses undeclared variables: {sorted(extra)}"
                )
            self._templates[stage] = self._env.from_string(source)

    def render(self, stage: Stage, **variables: Any) -> str:
        missing = STAGE_VARIABLES[stage] - set(variables)
        if missing:
            raise ValueError(f"render({stage.value}) missing variables: {sorted(missing)}")
        return self._templates[stage].render(**variables)


def load_ui_strings(locale: str = "en", root: Path | None = None) -> dict[str, str]:
    """Fixed conversational strings (greetings, confirmations, fallbacks)."""
    base = Path(root) if root is not None else TEMPLATE_ROOT
    path = base / locale / "ui.json"
    with open(path, encoding="utf-8") as fh:
        strings = json.load(fh)
    if not isinstance(strings, dict):
        raise ValueError(f"{path} must hold a JSON object")
    return strings


# ---------------------------------------------------------------------------
# the gateway


@dataclass
class CallRecord:
    stage: Stage
    schema_id: str
    attempts: int
    latency_s: float
    ok: bool
    error_kind: str | None = None


REPAIR_SUFFIX = (
    "\n\nYour previous reply was not valid:\n{error}\n"
    "Reply again with a single JSON object that satisfies the requested shape."
)


class Gateway:
    """Structured-output completion with schema enforcement and repair."""

    def __init__(self, provider: Provider, config: ProviderConfig | None = None):
        self.provider = provider
        self.config = config or ProviderConfig()
        self.calls: list[CallRecord] = []

    def complete_structured(
        self,
        request: StageRequest,
        extra_check: Callable[[BaseModel], str | None] | None = None,
    ) -> BaseModel:
        """Run one stage call; returns the parsed, validated response model.

        ``extra_check`` lets callers add context checks (for example "these
        element ids must exist") that participate in the same repair loop.
        """
        schema = SCHEMAS[request.response_schema_id]
        prompt = request.rendered_prompt
        max_calls = 1 + max(0, self.config.max_repair_retries)
        started = time.perf_counter()
        last_error = ""
        for attempt in range(1, max_calls + 1):
            try:
                raw = self.provider.complete(request, prompt)
            except StageError as exc:
                self._record(request, attempt, started, ok=False, error_kind=type(exc).__name__)
                exc.attempts = attempt
                raise
            try:
                value = schema.model_validate(json.loads(raw))
                problem = extra_check(value) if extra_check is not None else None
                if problem:
                    raise ValueError(problem)
            except (json.JSONDecodeError, ValidationError, ValueError) as exc:
                last_error = str(exc)
                prompt = request.rendered_prompt + REPAIR_SUFFIX.format(error=last_error)
                continue
            self._record(request, attempt, started, ok=True)
            return value
        self._record(request, max_calls, started, ok=False, error_kind="StageSchemaError")
        raise StageSchemaError(
            request.stage,
            f"response failed schema {request.response_schema_id} after "
            f"{max_calls} calls: {last_error}",
            attempts=max_calls,
        )

    def _record(
        self,
        request: StageRequest,
        attempts: int,
        started: float,
        ok: bool,
        error_kind: str | None = None,
    ) -> None:
        self.calls.append(
            CallRecord(
                stage=request.stage,
                schema_id=request.response_schema_id,
                attempts=attempts,
                latency_s=time.perf_counter() - started,
                ok=ok,
                error_kind=error_kind,
            )
        )
