"""Core domain types for the comic journaling engine.

Everything that crosses a module boundary is defined here as a pydantic
model so the wire format (snake_case JSON) falls out of the type
definitions.  Cross-field session invariants are checked by
:func:`validate`, which reports violations instead of raising, so test
fixtures can build intentionally broken sessions.
"""

from __future__ import annotations

import hashlib
import json
import re
from datetime import date, datetime
from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

GRID_SIZE = 5
MAX_SCENE_ELEMENTS = 8
MAX_TITLE_CANDIDATES = 3
STAMPS_ON_FINALIZE = 3


class Phase(str, Enum):
    PREPARATION = "preparation"
    ARTICULATION = "articulation"
    VERIFICATION = "verification"
    ELABORATION = "elaboration"
    REVISION = "revision"
    WRAPUP = "wrapup"
    FINALIZED = "finalized"


PHASE_ORDER: list[Phase] = [
    Phase.PREPARATION,
    Phase.ARTICULATION,
    Phase.VERIFICATION,
    Phase.ELABORATION,
    Phase.REVISION,
    Phase.WRAPUP,
    Phase.FINALIZED,
]


def phase_index(phase: Phase) -> int:
    return PHASE_ORDER.index(phase)


class PromptType(str, Enum):
    PLACE_PEOPLE_SELECTION = "place_people_selection"
    OPEN_ENDED = "open_ended"
    SCHEDULE_BASED = "schedule_based"


class PanelSlot(str, Enum):
    """The four strip panels: antecedent, behavior, consequence, emotion."""

    A = "A"
    B = "B"
    C = "C"
    E = "E"


SLOT_ORDER: list[PanelSlot] = [PanelSlot.A, PanelSlot.B, PanelSlot.C, PanelSlot.E]


def slot_index(slot: PanelSlot) -> int:
    return SLOT_ORDER.index(slot)


class Emotion(str, Enum):
    JOYFUL = "joyful"
    GLAD = "glad"
    HAPPY = "happy"
    EXCITED = "excited"
    SAD = "sad"
    ANGRY = "angry"
    UPSET = "upset"
    SCARED = "scared"
    AFRAID = "afraid"
    SURPRISED = "surprised"
    AMAZED = "amazed"
    BORED = "bored"


EMOTIONS: list[Emotion] = list(Emotion)

# Tags the story analysis may report as missing per panel.
MISSING_TAGS = ("actor", "action", "cause", "reaction", "emotion")


class Role(str, Enum):
    ADOLESCENT = "adolescent"
    SYSTEM = "system"


class Modality(str, Enum):
    SPEECH_TRANSCRIPT = "speech_transcript"
    TYPED = "typed"
    BUTTON = "button"


class PersonCategory(str, Enum):
    TEACHER = "teacher"
    FRIEND = "friend"
    FAMILY = "family"
    OTHER = "other"


def slugify(text: str) -> str:
    """Lowercase and turn whitespace runs into single hyphens."""
    return re.sub(r"\s+", "-", text.strip().lower())


def element_id(kind: str, label: str) -> str:
    return slugify(f"{kind} {label}")


# ---------------------------------------------------------------------------
# registry records


class AdolescentProfile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    name: str
    age: int
    gender: str = ""
    interests: list[str] = Field(default_factory=list)


class PeerProfile(BaseModel):
    """The AI peer persona (name, voice, look) chosen for an adolescent."""

    model_config = ConfigDict(extra="forbid")

    id: str
    name: str
    voice_id: str | None = None
    avatar_ref: str | None = None


class PlaceEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    profile_id: str
    label: str
    category: str = ""


class PersonEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    profile_id: str
    label: str
    category: PersonCategory = PersonCategory.OTHER


def validate_profile(profile: AdolescentProfile) -> list[str]:
    violations = []
    if not profile.name.strip():
        violations.append("profile name empty")
    if not 10 <= profile.age <= 19:
        violations.append(f"profile age {profile.age} outside [10, 19]")
    return violations


# ---------------------------------------------------------------------------
# conversation records


class Turn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    role: Role
    text: str
    phase: Phase
    modality: Modality
    timestamp: datetime
    # Machine-readable payload for button presses (choice ids, emotion
    # labels, selection ids); display text alone is not parseable.
    payload: dict[str, Any] | None = None

    @model_validator(mode="after")
    def _button_payload(self) -> "Turn":
        if self.modality is Modality.BUTTON and self.payload is None:
            raise ValueError("button turns must carry a machine-readable payload")
        return self


class EventFragment(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    source_turn: int


class PanelDescription(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slot: PanelSlot
    sentences: list[str] = Field(default_factory=list)
    complete: bool = False


class OrderDefect(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slot: PanelSlot
    description: str


class AnalysisResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trouble: bool
    missing: dict[PanelSlot, list[str]] = Field(default_factory=dict)
    order_defects: list[OrderDefect] = Field(default_factory=list)

    @model_validator(mode="after")
    def _cover_all_slots(self) -> "AnalysisResult":
        for slot in SLOT_ORDER:
            self.missing.setdefault(slot, [])
        for slot, tags in self.missing.items():
            for tag in tags:
                if tag not in MISSING_TAGS:
                    raise ValueError(f"unknown missing tag {tag!r} on slot {slot.value}")
        return self

    def incomplete_slots(self) -> list[PanelSlot]:
        return [slot for slot in SLOT_ORDER if self.missing.get(slot)]

    def all_clear(self) -> bool:
        return not self.incomplete_slots() and not self.order_defects


class QuestionKind(str, Enum):
    OPEN = "open"
    OPTIONS_IN_TEXT = "options_in_text"
    EMOTION = "emotion"


class QuestionFocus(str, Enum):
    WHY = "why"
    HOW = "how"
    NONE = "none"


class Question(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    kind: QuestionKind
    target_slot: PanelSlot | None = None
    focus: QuestionFocus = QuestionFocus.NONE
    target_tag: str | None = None

    @model_validator(mode="after")
    def _emotion_targets_e(self) -> "Question":
        if self.kind is QuestionKind.EMOTION and self.target_slot is not PanelSlot.E:
            raise ValueError("emotion questions must target slot E")
        return self


# ---------------------------------------------------------------------------
# scene records


class ElementKind(str, Enum):
    ACTOR = "actor"
    OBJECT = "object"
    CONCEPT = "concept"


class SceneElement(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = ""
    kind: ElementKind
    label: str
    # Actor-only attributes; rendered by the client near the actor's cell.
    action: str | None = None
    dialogue_line: str | None = None
    thought: str | None = None
    emotion: str | None = None

    @model_validator(mode="after")
    def _derive_id_and_check_attrs(self) -> "SceneElement":
        if not self.id:
            self.id = element_id(self.kind.value, self.label)
        if self.kind is not ElementKind.ACTOR:
            stray = [
                name
                for name in ("action", "dialogue_line", "thought", "emotion")
                if getattr(self, name) is not None
            ]
            if stray:
                raise ValueError(
                    f"{self.kind.value} element {self.label!r} carries actor "
                    f"attributes: {', '.join(stray)}"
                )
        return self


Cell = tuple[int, int]


class SceneDocument(BaseModel):
    """One panel's scene: elements, desired adjacencies, grid placements.

    The setting is a backdrop label only and never occupies a cell.  An
    empty scene (no elements) is the explicit blank-panel marker.
    """

    model_config = ConfigDict(extra="forbid")

    slot: PanelSlot
    setting: str | None = None
    elements: list[SceneElement] = Field(default_factory=list)
    adjacencies: list[tuple[str, str]] = Field(default_factory=list)
    placements: dict[str, Cell] = Field(default_factory=dict)
    unsatisfied: list[tuple[str, str]] = Field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.elements


def empty_scene(slot: PanelSlot) -> SceneDocument:
    return SceneDocument(slot=slot)


# ---------------------------------------------------------------------------
# user inputs (discriminated on "kind")


class SelectionInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["selection"] = "selection"
    prompt_type: PromptType
    place_id: str | None = None
    people_ids: list[str] = Field(default_factory=list)


class UtteranceInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["utterance"] = "utterance"
    text: str
    modality: Literal["speech_transcript", "typed"] = "typed"


class EmotionChoiceInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["emotion_choice"] = "emotion_choice"
    emotions: list[Emotion] = Field(min_length=1, max_length=len(EMOTIONS))

    @model_validator(mode="after")
    def _no_duplicates(self) -> "EmotionChoiceInput":
        if len(set(self.emotions)) != len(self.emotions):
            raise ValueError("duplicate emotions in choice")
        return self


class ButtonChoice(str, Enum):
    ALL_CORRECT = "all_correct"
    SOMETHING_TO_FIX = "something_to_fix"
    YES = "yes"
    NO = "no"
    TITLE_INDEX = "title_index"
    NEXT = "next"


class ButtonInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["button"] = "button"
    choice: ButtonChoice
    index: int | None = None

    @model_validator(mode="after")
    def _index_rules(self) -> "ButtonInput":
        if self.choice is ButtonChoice.TITLE_INDEX:
            if self.index is None or not 0 <= self.index < MAX_TITLE_CANDIDATES:
                raise ValueError("title_index requires index in 0..2")
        elif self.index is not None:
            raise ValueError(f"index not allowed with choice {self.choice.value}")
        return self


UserInput = Annotated[
    Union[SelectionInput, UtteranceInput, EmotionChoiceInput, ButtonInput],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# system actions (discriminated on "kind")


class SayAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["say"] = "say"
    text: str
    tts_request: dict[str, str] | None = None


class ShowEmotionButtonsAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["show_emotion_buttons"] = "show_emotion_buttons"
    emotions: list[Emotion] = Field(default_factory=lambda: list(EMOTIONS))


class ShowOutlineAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["show_outline"] = "show_outline"
    lines: list[str]


class ShowStripAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["show_strip"] = "show_strip"
    scenes: dict[PanelSlot, SceneDocument]


class ShowTitlesAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["show_titles"] = "show_titles"
    titles: list[str] = Field(min_length=3, max_length=3)


class AwardStampsAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["award_stamps"] = "award_stamps"
    count: int = STAMPS_ON_FINALIZE


class ErrorNoticeAction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["error_notice"] = "error_notice"
    text: str
    retryable: bool = True


SystemAction = Annotated[
    Union[
        SayAction,
        ShowEmotionButtonsAction,
        ShowOutlineAction,
        ShowStripAction,
        ShowTitlesAction,
        AwardStampsAction,
        ErrorNoticeAction,
    ],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# session and journal


def _fresh_panels() -> dict[PanelSlot, PanelDescription]:
    return {slot: PanelDescription(slot=slot) for slot in SLOT_ORDER}


def _fresh_scenes() -> dict[PanelSlot, SceneDocument]:
    return {slot: empty_scene(slot) for slot in SLOT_ORDER}


class Session(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    profile_id: str
    peer_id: str
    phase: Phase = Phase.PREPARATION
    prompt_type: PromptType | None = None
    selected_place: PlaceEntry | None = None
    selected_people: list[PersonEntry] = Field(default_factory=list)
    turns: list[Turn] = Field(default_factory=list)
    events: list[EventFragment] = Field(default_factory=list)
    panels: dict[PanelSlot, PanelDescription] = Field(default_factory=_fresh_panels)
    scenes: dict[PanelSlot, SceneDocument] = Field(default_factory=_fresh_scenes)
    title_candidates: list[str] = Field(default_factory=list)
    title: str | None = None
    stamps_awarded: int = 0
    created_at: datetime

    # Engine bookkeeping, serialized with the session so a snapshot is a
    # full picture of where the conversation stands.
    last_analysis: AnalysisResult | None = None
    pending_question: Question | None = None
    pending_fix: bool = False
    pending_title_index: int | None = None
    articulation_turns: int = 0
    articulation_reprompted: bool = False
    articulation_restarted: bool = False
    elaboration_cycles: int = 0
    composed_fingerprints: dict[PanelSlot, str] = Field(default_factory=dict)


class PhaseMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    turns: int = 0
    adolescent_turns: int = 0
    duration_s: int = 0


class EntryMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    total_turns: int
    adolescent_turns: int
    system_turns: int
    total_duration_s: int
    per_phase: dict[Phase, PhaseMetrics]
    prompt_type: PromptType | None = None


class JournalPanel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    description: PanelDescription
    scene: SceneDocument


class JournalEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    session_id: str
    profile_id: str
    title: str
    date: date
    panels: dict[PanelSlot, JournalPanel]
    metrics: EntryMetrics


# ---------------------------------------------------------------------------
# canonical serialization


def to_jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    return value


def canonical_json(value: Any) -> str:
    """Stable JSON text: sorted keys, compact separators, raw unicode."""
    return json.dumps(
        to_jsonable(value), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def pretty_json(value: Any) -> str:
    """Readable variant used for golden files; still deterministic."""
    return json.dumps(to_jsonable(value), sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def checksum(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# session invariant checking


def _panel_should_be_complete(
    panel: PanelDescription, analysis: AnalysisResult | None
) -> bool:
    if not panel.sentences:
        return False
    if analysis is not None and analysis.missing.get(panel.slot):
        return False
    return True


def validate(session: Session) -> list[str]:
    """Check cross-field invariants; returns human-readable violations."""
    violations: list[str] = []

    finalized = session.phase is Phase.FINALIZED
    if finalized and session.title is None:
        violations.append("finalized session has no title")
    if not finalized and session.title is not None:
        violations.append("title set before finalization")
    expected_stamps = STAMPS_ON_FINALIZE if finalized else 0
    if session.stamps_awarded != expected_stamps:
        violations.append(
            f"stamps_awarded={session.stamps_awarded} in phase {session.phase.value}"
        )

    previous: datetime | None = None
    for i, turn in enumerate(session.turns):
        if previous is not None and turn.timestamp < previous:
            violations.append(f"turn {i} timestamp decreases")
        previous = turn.timestamp

    for i, event in enumerate(session.events):
        if not 0 <= event.source_turn < len(session.turns):
            violations.append(f"event {i} source_turn {event.source_turn} out of range")

    if set(session.panels) != set(SLOT_ORDER):
        violations.append("panels must cover exactly slots A, B, C, E")
    for slot, panel in session.panels.items():
        if panel.slot is not slot:
            violations.append(f"panel keyed {slot.value} describes slot {panel.slot.value}")
        if panel.complete != _panel_should_be_complete(panel, session.last_analysis):
            violations.append(
                f"panel {slot.value} complete flag inconsistent with content/analysis"
            )

    for slot, scene in session.scenes.items():
        if scene.slot is not slot:
            violations.append(f"scene keyed {slot.value} describes slot {scene.slot.value}")
        ids = [el.id for el in scene.elements]
        if len(set(ids)) != len(ids):
            violations.append(f"scene {slot.value} has duplicate element ids")
        if len(scene.elements) > MAX_SCENE_ELEMENTS:
            violations.append(f"scene {slot.value} exceeds {MAX_SCENE_ELEMENTS} elements")
        id_set = set(ids)
        for placed_id in scene.placements:
            if placed_id not in id_set:
                violations.append(f"scene {slot.value} places unknown element {placed_id!r}")
        if scene.elements:
            for eid in id_set:
                if eid not in scene.placements:
                    violations.append(f"scene {slot.value} leaves {eid!r} unplaced")
        seen_cells: dict[Cell, str] = {}
        for eid, cell in scene.placements.items():
            row, col = cell
            if not (0 <= row < GRID_SIZE and 0 <= col < GRID_SIZE):
                violations.append(f"scene {slot.value} places {eid!r} out of bounds {cell}")
            if cell in seen_cells:
                violations.append(f"cell collision {slot.value}:({row},{col})")
            seen_cells[cell] = eid

    if len(session.title_candidates) > MAX_TITLE_CANDIDATES:
        violations.append("more than three title candidates")
    if session.pending_title_index is not None and not (
        0 <= session.pending_title_index < len(session.title_candidates)
    ):
        violations.append("pending title index out of range")

    if session.stamps_awarded not in (0, STAMPS_ON_FINALIZE):
        violations.append(f"stamps_awarded={session.stamps_awarded} is not 0 or 3")

    return violations
