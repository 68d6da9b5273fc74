"""Narrative stages: event extraction, questions, analysis, reconstruction.

Each operation renders its stage prompt, calls the gateway, and shapes the
structured response for the engine.  Two operations are deliberately local
and provider-free: outline numbering and the emotion-answer sentence, whose
outputs are fixed by contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import IllegalStateError
from .gateway import (
    Gateway,
    PanelsResponse,
    Stage,
    StageError,
    StageRequest,
    TemplateRegistry,
    match_key,
)
from .models import (
    MISSING_TAGS,
    SLOT_ORDER,
    AdolescentProfile,
    AnalysisResult,
    EventFragment,
    Emotion,
    PanelDescription,
    PanelSlot,
    PeerProfile,
    PersonEntry,
    PlaceEntry,
    Question,
    QuestionFocus,
    QuestionKind,
    Turn,
)

_TERMINAL = (".", "!", "?", "…", '"', "'")


@dataclass
class PipelineContext:
    adolescent: AdolescentProfile
    peer: PeerProfile
    place: PlaceEntry | None = None
    people: list[PersonEntry] = field(default_factory=list)

    def place_label(self) -> str:
        return self.place.label if self.place else "(not chosen)"

    def people_label(self) -> str:
        return ", ".join(p.label for p in self.people) if self.people else "(not chosen)"


@dataclass(frozen=True)
class KeyInputs:
    """Prompt-relevant inputs the scripted provider keys on."""

    utterance: str = ""
    missing: tuple[str, ...] = ()

    def key(self, stage: Stage) -> str:
        return match_key(stage, self.utterance, list(self.missing))


def dialogue_text(turns: list[Turn]) -> str:
    return "\n".join(f"{t.role.value}: {t.text}" for t in turns) or "(empty)"


def panels_text(panels: dict[PanelSlot, PanelDescription]) -> str:
    lines = []
    for slot in SLOT_ORDER:
        panel = panels.get(slot)
        body = " ".join(panel.sentences) if panel and panel.sentences else "(empty)"
        lines.append(f"{slot.value}: {body}")
    return "\n".join(lines)


def _check_sentences(sentences: list[str], where: str) -> str | None:
    for s in sentences:
        if not s.strip():
            return f"{where} contains an empty sentence"
        if not s.strip().endswith(_TERMINAL):
            return f"{where} sentence lacks terminal punctuation: {s!r}"
    return None


def _check_panels_response(value: PanelsResponse) -> str | None:
    for slot, sentences in value.panels.items():
        problem = _check_sentences(sentences, f"panel {slot.value}")
        if problem:
            return problem
        if not sentences:
            return f"panel {slot.value} replaced with an empty list"
    return None


def emotion_sentence(emotions: list[Emotion]) -> str:
    """Deterministic sentence for emotion-button answers.

    Each chosen label appears verbatim exactly once: "I was sad." /
    "I was sad and scared." / "I was sad, angry and scared."
    """
    labels = [Emotion(e).value for e in emotions]
    if len(labels) == 1:
        joined = labels[0]
    elif len(labels) == 2:
        joined = f"{labels[0]} and {labels[1]}"
    else:
        joined = ", ".join(labels[:-1]) + f" and {labels[-1]}"
    return f"I was {joined}."


def compose_preliminary_outline(events: list[EventFragment]) -> list[str]:
    """Numbered one-per-event lines; numbering starts at 1 in extraction order."""
    return [f"{i + 1}: {event.text}" for i, event in enumerate(events)]


_OUTLINE_PREFIX = re.compile(r"^\s*\d+\s*[:.)]\s*")


def strip_outline_numbering(line: str) -> str:
    return _OUTLINE_PREFIX.sub("", line).strip()


class NarrativePipeline:
    def __init__(self, gateway: Gateway, templates: TemplateRegistry, ui: dict[str, str]):
        self.gateway = gateway
        self.templates = templates
        self.ui = ui

    # -- articulation ------------------------------------------------------

    def extract_events(
        self, turns: list[Turn], context: PipelineContext, keys: KeyInputs
    ) -> list[str]:
        prompt = self.templates.render(
            Stage.EVENT_EXTRACT,
            peer_name=context.peer.name,
            adolescent_name=context.adolescent.name,
            place=context.place_label(),
            people=context.people_label(),
            dialogue=dialogue_text(turns),
        )
        request = StageRequest(
            stage=Stage.EVENT_EXTRACT,
            rendered_prompt=prompt,
            response_schema_id="events_v1",
            match_key=keys.key(Stage.EVENT_EXTRACT),
        )
        value = self.gateway.complete_structured(request)
        return [text.strip() for text in value.events if text.strip()]

    def generate_question_articulation(
        self,
        turns: list[Turn],
        context: PipelineContext,
        events: list[EventFragment],
        keys: KeyInputs,
    ) -> Question:
        prompt = self.templates.render(
            Stage.QUESTION_ARTICULATION,
            peer_name=context.peer.name,
            adolescent_name=context.adolescent.name,
            place=context.place_label(),
            people=context.people_label(),
            dialogue=dialogue_text(turns),
            events="\n".join(e.text for e in events) or "(none yet)",
        )
        request = StageRequest(
            stage=Stage.QUESTION_ARTICULATION,
            rendered_prompt=prompt,
            response_schema_id="question_v1",
            match_key=keys.key(Stage.QUESTION_ARTICULATION),
        )
        value = self.gateway.complete_structured(request)
        kind = (
            QuestionKind.OPTIONS_IN_TEXT
            if value.kind == "options_in_text"
            else QuestionKind.OPEN
        )
        return Question(text=value.text, kind=kind, focus=QuestionFocus.NONE)

    # -- elaboration -------------------------------------------------------

    def analyze_story(
        self, panels: dict[PanelSlot, PanelDescription], keys: KeyInputs
    ) -> AnalysisResult:
        prompt = self.templates.render(Stage.STORY_ANALYZE, panels=panels_text(panels))
        request = StageRequest(
            stage=Stage.STORY_ANALYZE,
            rendered_prompt=prompt,
            response_schema_id="analysis_v1",
            match_key=keys.key(Stage.STORY_ANALYZE),
        )
        return self.gateway.complete_structured(request)

    @staticmethod
    def choose_elaboration_target(
        analysis: AnalysisResult,
    ) -> tuple[PanelSlot, str, QuestionFocus]:
        """Lowest-ordered incomplete slot, first missing tag in canonical
        order; why-focus for trouble stories, how-focus otherwise."""
        incomplete = analysis.incomplete_slots()
        if not incomplete:
            raise IllegalStateError("no missing tags to ask about")
        slot = incomplete[0]
        tags = analysis.missing[slot]
        tag = next(t for t in MISSING_TAGS if t in tags)
        if tag == "emotion":
            focus = QuestionFocus.NONE
        elif analysis.trouble:
            focus = QuestionFocus.WHY
        else:
            focus = QuestionFocus.HOW
        return slot, tag, focus

    def generate_question_elaboration(
        self,
        turns: list[Turn],
        panels: dict[PanelSlot, PanelDescription],
        analysis: AnalysisResult,
        context: PipelineContext,
        keys: KeyInputs,
    ) -> Question:
        slot, tag, focus = self.choose_elaboration_target(analysis)
        prompt = self.templates.render(
            Stage.QUESTION_ELABORATION,
            peer_name=context.peer.name,
            dialogue=dialogue_text(turns),
            panels=panels_text(panels),
            target_slot=slot.value,
            target_tag=tag,
            focus=focus.value,
        )
        request = StageRequest(
            stage=Stage.QUESTION_ELABORATION,
            rendered_prompt=prompt,
            response_schema_id="question_v1",
            match_key=keys.key(Stage.QUESTION_ELABORATION),
        )
        value = self.gateway.complete_structured(request)
        if tag == "emotion":
            kind = QuestionKind.EMOTION
        elif value.kind == "options_in_text":
            kind = QuestionKind.OPTIONS_IN_TEXT
        else:
            kind = QuestionKind.OPEN
        return Question(
            text=value.text, kind=kind, target_slot=slot, focus=focus, target_tag=tag
        )

    def reconstruct_descriptions(
        self,
        panels: dict[PanelSlot, PanelDescription],
        question: str,
        answer: str,
        target_slot: PanelSlot | None,
        target_tag: str | None,
        keys: KeyInputs,
    ) -> dict[PanelSlot, list[str]]:
        """Returns replacement sentence lists for the slots the provider
        changed; untouched slots are absent and stay byte-identical."""
        prompt = self.templates.render(
            Stage.RECONSTRUCT,
            panels=panels_text(panels),
            question=question,
            answer=answer,
            target_slot=target_slot.value if target_slot else "-",
            target_tag=target_tag or "-",
        )
        request = StageRequest(
            stage=Stage.RECONSTRUCT,
            rendered_prompt=prompt,
            response_schema_id="panels_v1",
            match_key=keys.key(Stage.RECONSTRUCT),
        )
        value = self.gateway.complete_structured(request, extra_check=_check_panels_response)
        return dict(value.panels)

    # -- modification ------------------------------------------------------

    def apply_outline_modification(
        self, outline: list[str], request_text: str, keys: KeyInputs
    ) -> list[str]:
        prompt = self.templates.render(
            Stage.MODIFY,
            target_kind="outline",
            current="\n".join(outline),
            request=request_text,
        )
        request = StageRequest(
            stage=Stage.MODIFY,
            rendered_prompt=prompt,
            response_schema_id="outline_v1",
            match_key=keys.key(Stage.MODIFY),
        )
        value = self.gateway.complete_structured(request)
        return [line.strip() for line in value.outline]

    def apply_panel_modification(
        self,
        panels: dict[PanelSlot, PanelDescription],
        request_text: str,
        keys: KeyInputs,
    ) -> dict[PanelSlot, list[str]]:
        prompt = self.templates.render(
            Stage.MODIFY,
            target_kind="panels",
            current=panels_text(panels),
            request=request_text,
        )
        request = StageRequest(
            stage=Stage.MODIFY,
            rendered_prompt=prompt,
            response_schema_id="panels_v1",
            match_key=keys.key(Stage.MODIFY),
        )
        value = self.gateway.complete_structured(request, extra_check=_check_panels_response)
        return dict(value.panels)

    # -- wrapup ------------------------------------------------------------

    def wrapup_response(
        self,
        panels: dict[PanelSlot, PanelDescription],
        context: PipelineContext,
        keys: KeyInputs,
    ) -> str:
        self._require_complete(panels)
        emotions = " ".join(panels[PanelSlot.E].sentences)
        prompt = self.templates.render(
            Stage.WRAPUP,
            peer_name=context.peer.name,
            panels=panels_text(panels),
            emotions=emotions,
        )
        request = StageRequest(
            stage=Stage.WRAPUP,
            rendered_prompt=prompt,
            response_schema_id="text_v1",
            match_key=keys.key(Stage.WRAPUP),
        )
        try:
            value = self.gateway.complete_structured(request)
        except StageError:
            return self.ui["wrapup_fallback"]
        return value.text

    def suggest_titles(
        self, panels: dict[PanelSlot, PanelDescription], keys: KeyInputs
    ) -> list[str]:
        self._require_complete(panels)
        prompt = self.templates.render(Stage.TITLES, panels=panels_text(panels))
        request = StageRequest(
            stage=Stage.TITLES,
            rendered_prompt=prompt,
            response_schema_id="titles_v1",
            match_key=keys.key(Stage.TITLES),
        )
        value = self.gateway.complete_structured(request)
        return [t.strip() for t in value.titles]

    @staticmethod
    def _require_complete(panels: dict[PanelSlot, PanelDescription]) -> None:
        incomplete = [s.value for s in SLOT_ORDER if not panels[s].complete]
        if incomplete:
            raise IllegalStateError(f"panels not complete: {', '.join(incomplete)}")
