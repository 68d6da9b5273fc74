"""Six-phase conversation engine.

Preparation -> Articulation -> Verification -> Elaboration -> Revision ->
Wrapup -> Finalized, driven by one user input at a time.  ``handle_input``
works on a deep copy of the session and only returns the mutated copy on
success, so a pipeline failure leaves the caller's session untouched (the
caller gets an error notice action instead).

Loop bounds (fixed here, not configuration a user can weaken):

* Articulation: 5 adolescent turns per round.  At the cap with at least
  one event the outline is shown anyway; with zero events the engine
  re-prompts once, then restarts once in open-ended mode, and as a last
  resort promotes the final utterance to a single event so every legal
  input sequence still reaches a reviewable outline.
* Elaboration: 12 question-answer cycles.  At the cap, still-empty A/B/C
  panels get a placeholder sentence; a still-missing E panel triggers one
  final emotion-button ask (the answer is user-supplied, not provider
  work) before the strip moves on to Revision.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable, Protocol

from . import analytics
from .errors import IllegalStateError, NotFoundError, ProtocolError
from .gateway import Gateway, StageError, TemplateRegistry, load_ui_strings
from .models import (
    SLOT_ORDER,
    AdolescentProfile,
    AnalysisResult,
    AwardStampsAction,
    ButtonChoice,
    ButtonInput,
    EmotionChoiceInput,
    ErrorNoticeAction,
    EventFragment,
    JournalEntry,
    JournalPanel,
    Modality,
    PanelSlot,
    PeerProfile,
    PersonEntry,
    Phase,
    PlaceEntry,
    PromptType,
    Question,
    QuestionKind,
    Role,
    SayAction,
    SceneDocument,
    SelectionInput,
    Session,
    ShowEmotionButtonsAction,
    ShowOutlineAction,
    ShowStripAction,
    ShowTitlesAction,
    SystemAction,
    Turn,
    UserInput,
    UtteranceInput,
)
from .pipeline import (
    KeyInputs,
    NarrativePipeline,
    PipelineContext,
    compose_preliminary_outline,
    emotion_sentence,
    strip_outline_numbering,
)
from .scene import SceneComposer, description_fingerprint

ARTICULATION_TURN_CAP = 5
ELABORATION_CYCLE_CAP = 12


class Registry(Protocol):
    def get_profile(self, profile_id: str) -> AdolescentProfile | None: ...

    def get_peer(self, peer_id: str) -> PeerProfile | None: ...

    def get_place(self, place_id: str) -> PlaceEntry | None: ...

    def get_person(self, person_id: str) -> PersonEntry | None: ...


class InMemoryRegistry:
    """Dict-backed registry for tests and the replay harness."""

    def __init__(self) -> None:
        self.profiles: dict[str, AdolescentProfile] = {}
        self.peers: dict[str, PeerProfile] = {}
        self.places: dict[str, PlaceEntry] = {}
        self.people: dict[str, PersonEntry] = {}

    def get_profile(self, profile_id: str) -> AdolescentProfile | None:
        return self.profiles.get(profile_id)

    def get_peer(self, peer_id: str) -> PeerProfile | None:
        return self.peers.get(peer_id)

    def get_place(self, place_id: str) -> PlaceEntry | None:
        return self.places.get(place_id)

    def get_person(self, person_id: str) -> PersonEntry | None:
        return self.people.get(person_id)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def _new_id() -> str:
    return uuid.uuid4().hex


@dataclass
class TickingClock:
    """Deterministic clock for replays: starts at ``start``, advances
    ``step_s`` seconds per call."""

    start: datetime
    step_s: int = 1

    def __post_init__(self) -> None:
        self._tick = 0

    def __call__(self) -> datetime:
        value = self.start + timedelta(seconds=self._tick * self.step_s)
        self._tick += 1
        return value


class SerialIdFactory:
    def __init__(self, prefix: str = "id"):
        self.prefix = prefix
        self._n = 0

    def __call__(self) -> str:
        self._n += 1
        return f"{self.prefix}-{self._n:04d}"


class JournalEngine:
    def __init__(
        self,
        gateway: Gateway,
        registry: Registry,
        *,
        templates: TemplateRegistry | None = None,
        locale: str = "en",
        clock: Callable[[], datetime] = utc_now,
        id_factory: Callable[[], str] = _new_id,
        journal_sink: Callable[[JournalEntry], None] | None = None,
        tts_enabled: bool = False,
    ):
        self.registry = registry
        self.clock = clock
        self.id_factory = id_factory
        self.journal_sink = journal_sink
        self.tts_enabled = tts_enabled
        self.templates = templates or TemplateRegistry(locale=locale)
        self.ui = load_ui_strings(locale)
        self.pipeline = NarrativePipeline(gateway, self.templates, self.ui)
        self.composer = SceneComposer(gateway, self.templates)

    # -- public operations ---------------------------------------------------

    def create_session(
        self, profile_id: str, peer_id: str
    ) -> tuple[Session, list[SystemAction]]:
        profile = self.registry.get_profile(profile_id)
        if profile is None:
            raise NotFoundError(f"unknown profile {profile_id!r}")
        peer = self.registry.get_peer(peer_id)
        if peer is None:
            raise NotFoundError(f"unknown peer {peer_id!r}")
        session = Session(
            id=self.id_factory(),
            profile_id=profile_id,
            peer_id=peer_id,
            created_at=self.clock(),
        )
        actions: list[SystemAction] = []
        greeting = self.ui["greeting"].format(name=profile.name, peer_name=peer.name)
        self._say(session, actions, greeting, peer)
        return session, actions

    def handle_input(
        self, session: Session, user_input: UserInput
    ) -> tuple[Session, list[SystemAction]]:
        """Process one input; returns (new session, emitted actions).

        On a pipeline/provider failure the original session is returned
        unchanged alongside a retryable error notice.
        """
        if session.phase is Phase.FINALIZED:
            raise ProtocolError("session already finalized", expected=[])
        work = session.model_copy(deep=True)
        actions: list[SystemAction] = []
        try:
            self._dispatch(work, user_input, actions)
        except StageError:
            return session, [
                ErrorNoticeAction(text=self.ui["error_retry"], retryable=True)
            ]
        return work, actions

    def get_strip(self, session: Session) -> dict[PanelSlot, SceneDocument]:
        return {slot: scene.model_copy(deep=True) for slot, scene in session.scenes.items()}

    def finalize(self, session: Session) -> JournalEntry:
        """Commit title and stamps, build the journal entry.

        Pre: Wrapup phase, a title chosen, all four panels complete.
        """
        if session.phase is not Phase.WRAPUP:
            raise IllegalStateError(f"finalize in phase {session.phase.value}")
        if session.pending_title_index is None:
            raise IllegalStateError("finalize before a title was chosen")
        incomplete = [s.value for s in SLOT_ORDER if not session.panels[s].complete]
        if incomplete:
            raise IllegalStateError(f"finalize with incomplete panels: {incomplete}")
        session.title = session.title_candidates[session.pending_title_index]
        session.phase = Phase.FINALIZED
        session.stamps_awarded = 3
        entry = JournalEntry(
            id=self.id_factory(),
            session_id=session.id,
            profile_id=session.profile_id,
            title=session.title,
            date=self.clock().date(),
            panels={
                slot: JournalPanel(
                    description=session.panels[slot].model_copy(deep=True),
                    scene=session.scenes[slot].model_copy(deep=True),
                )
                for slot in SLOT_ORDER
            },
            metrics=analytics.entry_metrics(session),
        )
        if self.journal_sink is not None:
            self.journal_sink(entry)
        return entry

    # -- dispatch ------------------------------------------------------------

    def _dispatch(self, work: Session, user_input: UserInput, actions: list[SystemAction]) -> None:
        handlers = {
            Phase.PREPARATION: self._in_preparation,
            Phase.ARTICULATION: self._in_articulation,
            Phase.VERIFICATION: self._in_verification,
            Phase.ELABORATION: self._in_elaboration,
            Phase.REVISION: self._in_revision,
            Phase.WRAPUP: self._in_wrapup,
        }
        handlers[work.phase](work, user_input, actions)

    def _context(self, work: Session) -> PipelineContext:
        profile = self.registry.get_profile(work.profile_id)
        peer = self.registry.get_peer(work.peer_id)
        if profile is None or peer is None:
            raise NotFoundError("session references a missing profile or peer")
        return PipelineContext(
            adolescent=profile,
            peer=peer,
            place=work.selected_place,
            people=list(work.selected_people),
        )

    def _keys(self, work: Session) -> KeyInputs:
        utterance = ""
        for turn in reversed(work.turns):
            if turn.role is Role.ADOLESCENT:
                utterance = turn.text
                break
        missing: list[str] = []
        if work.last_analysis is not None:
            for slot in SLOT_ORDER:
                for tag in work.last_analysis.missing.get(slot, []):
                    missing.append(f"{slot.value}:{tag}")
        return KeyInputs(utterance=utterance, missing=tuple(missing))

    # -- turn/action helpers ---------------------------------------------------

    def _say(
        self,
        work: Session,
        actions: list[SystemAction],
        text: str,
        peer: PeerProfile | None = None,
    ) -> None:
        tts = None
        if self.tts_enabled:
            if peer is None:
                peer = self.registry.get_peer(work.peer_id)
            voice = peer.voice_id if peer and peer.voice_id else ""
            tts = {"voice_id": voice, "text": text}
        work.turns.append(
            Turn(
                role=Role.SYSTEM,
                text=text,
                phase=work.phase,
                modality=Modality.TYPED,
                timestamp=self.clock(),
            )
        )
        actions.append(SayAction(text=text, tts_request=tts))

    def _user_turn(
        self,
        work: Session,
        text: str,
        modality: Modality,
        payload: dict | None = None,
    ) -> int:
        work.turns.append(
            Turn(
                role=Role.ADOLESCENT,
                text=text,
                phase=work.phase,
                modality=modality,
                timestamp=self.clock(),
                payload=payload,
            )
        )
        return len(work.turns) - 1

    def _ask(self, work: Session, actions: list[SystemAction], question: Question) -> None:
        self._say(work, actions, question.text)
        work.pending_question = question
        if question.kind is QuestionKind.EMOTION:
            actions.append(ShowEmotionButtonsAction())

    def _button_label(self, choice: ButtonChoice, index: int | None, work: Session) -> str:
        if choice is ButtonChoice.TITLE_INDEX:
            if index is not None and index < len(work.title_candidates):
                return work.title_candidates[index]
            return self.ui["label_title_pick"].format(index=(index or 0) + 1)
        return self.ui[f"label_{choice.value}"]

    def _refresh_complete_flags(self, work: Session) -> None:
        for slot in SLOT_ORDER:
            panel = work.panels[slot]
            flagged = bool(
                work.last_analysis is not None and work.last_analysis.missing.get(slot)
            )
            panel.complete = bool(panel.sentences) and not flagged

    # -- phase: preparation ----------------------------------------------------

    def _in_preparation(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        if not isinstance(user_input, SelectionInput):
            raise ProtocolError(
                f"{work.phase.value} expects a prompt selection",
                expected=["selection"],
            )
        if user_input.prompt_type is PromptType.PLACE_PEOPLE_SELECTION:
            if user_input.place_id is None:
                raise ProtocolError(
                    "place_people_selection requires a place_id", expected=["selection"]
                )
            place = self.registry.get_place(user_input.place_id)
            if place is None:
                raise NotFoundError(f"unknown place {user_input.place_id!r}")
            people = []
            for pid in user_input.people_ids:
                person = self.registry.get_person(pid)
                if person is None:
                    raise NotFoundError(f"unknown person {pid!r}")
                people.append(person)
            work.selected_place = place
            work.selected_people = people
            label = self.ui["selection_separator"].join(
                [place.label] + [p.label for p in people]
            )
        else:
            if user_input.place_id is not None or user_input.people_ids:
                raise ProtocolError(
                    "place/people only apply to place_people_selection",
                    expected=["selection"],
                )
            label = self.ui[f"label_{user_input.prompt_type.value}"]
        work.prompt_type = user_input.prompt_type
        self._user_turn(
            work,
            label,
            Modality.BUTTON,
            payload={
                "prompt_type": user_input.prompt_type.value,
                "place_id": user_input.place_id,
                "people_ids": list(user_input.people_ids),
            },
        )
        work.phase = Phase.ARTICULATION
        question = self.pipeline.generate_question_articulation(
            work.turns, self._context(work), work.events, self._keys(work)
        )
        self._ask(work, actions, question)

    # -- phase: articulation -----------------------------------------------------

    def _in_articulation(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        if not isinstance(user_input, UtteranceInput):
            raise ProtocolError(
                f"{work.phase.value} expects the adolescent to talk",
                expected=["utterance"],
            )
        turn_index = self._user_turn(
            work, user_input.text, Modality(user_input.modality)
        )
        work.articulation_turns += 1
        work.pending_question = None

        texts = self.pipeline.extract_events(
            work.turns, self._context(work), self._keys(work)
        )
        previous = {e.text: e for e in work.events}
        work.events = [
            previous.get(text, EventFragment(text=text, source_turn=turn_index))
            for text in texts
        ]

        if articulation_gate(work.events):
            self._enter_verification(work, actions)
            return
        if work.articulation_turns < ARTICULATION_TURN_CAP:
            question = self.pipeline.generate_question_articulation(
                work.turns, self._context(work), work.events, self._keys(work)
            )
            self._ask(work, actions, question)
            return
        if work.events:
            # cap reached with at least one event: proceed anyway
            self._enter_verification(work, actions)
            return
        if not work.articulation_reprompted:
            work.articulation_reprompted = True
            self._say(work, actions, self.ui["articulation_reprompt"])
            return
        if not work.articulation_restarted:
            work.articulation_restarted = True
            work.articulation_reprompted = False
            work.articulation_turns = 0
            work.prompt_type = PromptType.OPEN_ENDED
            self._say(work, actions, self.ui["articulation_restart"])
            return
        # Degenerate path: promote the last utterance to a single event so
        # the conversation still lands on a reviewable outline.
        text = user_input.text.strip() or self.ui["cap_filler_sentence"]
        if not text.endswith((".", "!", "?")):
            text += "."
        work.events = [EventFragment(text=text, source_turn=turn_index)]
        self._enter_verification(work, actions)

    def _enter_verification(self, work: Session, actions: list[SystemAction]) -> None:
        work.phase = Phase.VERIFICATION
        work.pending_question = None
        self._say(work, actions, self.ui["verification_intro"])
        actions.append(ShowOutlineAction(lines=compose_preliminary_outline(work.events)))

    # -- phase: verification -------------------------------------------------------

    def _in_verification(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        expected = ["button(all_correct)", "button(something_to_fix)", "utterance"]
        if isinstance(user_input, ButtonInput):
            if user_input.choice is ButtonChoice.ALL_CORRECT:
                self._user_turn(
                    work,
                    self._button_label(user_input.choice, None, work),
                    Modality.BUTTON,
                    payload={"choice": "all_correct"},
                )
                self._say(work, actions, self.ui["verification_confirmed"])
                self._enter_elaboration(work, actions)
                return
            if user_input.choice is ButtonChoice.SOMETHING_TO_FIX:
                self._user_turn(
                    work,
                    self._button_label(user_input.choice, None, work),
                    Modality.BUTTON,
                    payload={"choice": "something_to_fix"},
                )
                self._say(work, actions, self.ui["revision_which_part"])
                return
            raise ProtocolError(
                f"button {user_input.choice.value} not valid during outline check",
                expected=expected,
            )
        if isinstance(user_input, UtteranceInput):
            turn_index = self._user_turn(
                work, user_input.text, Modality(user_input.modality)
            )
            outline = compose_preliminary_outline(work.events)
            new_lines = self.pipeline.apply_outline_modification(
                outline, user_input.text, self._keys(work)
            )
            sentences = [strip_outline_numbering(line) for line in new_lines]
            previous = {e.text: e for e in work.events}
            work.events = [
                previous.get(text, EventFragment(text=text, source_turn=turn_index))
                for text in sentences
                if text
            ]
            self._say(work, actions, self.ui["verification_reshow"])
            actions.append(
                ShowOutlineAction(lines=compose_preliminary_outline(work.events))
            )
            return
        raise ProtocolError("outline check expects a button or a correction", expected=expected)

    # -- phase: elaboration ----------------------------------------------------------

    def _enter_elaboration(self, work: Session, actions: list[SystemAction]) -> None:
        work.phase = Phase.ELABORATION
        outline = compose_preliminary_outline(work.events)
        replacements = self.pipeline.reconstruct_descriptions(
            work.panels,
            question=self.ui["verification_intro"],
            answer="\n".join(outline),
            target_slot=None,
            target_tag=None,
            keys=self._keys(work),
        )
        self._apply_panel_replacements(work, replacements)
        self._refresh_complete_flags(work)
        self._recompose(work, actions)
        self._elaboration_step(work, actions, entering=True)

    def _apply_panel_replacements(
        self, work: Session, replacements: dict[PanelSlot, list[str]]
    ) -> None:
        for slot, sentences in replacements.items():
            work.panels[slot].sentences = list(sentences)

    def _recompose(self, work: Session, actions: list[SystemAction]) -> None:
        """Recompose scenes for changed panels and show the strip."""
        result = self.composer.compose_strip(
            work.panels,
            self._context(work),
            work.scenes,
            work.composed_fingerprints,
            self._keys(work),
        )
        if result.errors:
            # Treat any slot failure as a failure of the whole step; the
            # working copy is discarded by handle_input.
            raise next(iter(result.errors.values()))
        work.scenes = result.scenes
        work.composed_fingerprints = result.fingerprints
        actions.append(
            ShowStripAction(
                scenes={s: doc.model_copy(deep=True) for s, doc in work.scenes.items()}
            )
        )

    def _elaboration_step(
        self, work: Session, actions: list[SystemAction], *, entering: bool
    ) -> None:
        analysis = self.pipeline.analyze_story(work.panels, self._keys(work))
        for slot in SLOT_ORDER:
            if not work.panels[slot].sentences and not analysis.missing.get(slot):
                # A panel with no sentences is never done, whatever the
                # analysis claims; keep asking (the cycle cap still applies).
                analysis.missing[slot] = [
                    "emotion" if slot is PanelSlot.E else "action"
                ]
        work.last_analysis = analysis
        self._refresh_complete_flags(work)

        if analysis.all_clear():
            if not entering:
                self._say(work, actions, self.ui["elaboration_done"])
            # every path here has just recomposed and shown the strip
            self._enter_revision_after_strip(work, actions)
            return

        if analysis.incomplete_slots() and work.elaboration_cycles < ELABORATION_CYCLE_CAP:
            if entering:
                self._say(work, actions, self.ui["elaboration_intro"])
            work.elaboration_cycles += 1
            question = self.pipeline.generate_question_elaboration(
                work.turns, work.panels, analysis, self._context(work), self._keys(work)
            )
            self._ask(work, actions, question)
            return

        if not analysis.incomplete_slots():
            # Only chronology defects left: let the reconstructor reorder
            # without bothering the adolescent, then re-check.
            if work.elaboration_cycles >= ELABORATION_CYCLE_CAP:
                self._cap_exit(work, actions)
                return
            work.elaboration_cycles += 1
            defects = "; ".join(
                f"{d.slot.value}: {d.description}" for d in analysis.order_defects
            )
            replacements = self.pipeline.reconstruct_descriptions(
                work.panels,
                question="(reorder panels chronologically)",
                answer=defects,
                target_slot=None,
                target_tag=None,
                keys=self._keys(work),
            )
            self._apply_panel_replacements(work, replacements)
            self._refresh_complete_flags(work)
            self._recompose(work, actions)
            self._elaboration_step(work, actions, entering=False)
            return

        self._cap_exit(work, actions)

    def _cap_exit(self, work: Session, actions: list[SystemAction]) -> None:
        """12-cycle cap: placeholder sentences for empty A/B/C; one final
        emotion ask when E is still missing, since that answer is pure
        button input and cannot loop."""
        for slot in (PanelSlot.A, PanelSlot.B, PanelSlot.C):
            if not work.panels[slot].sentences:
                work.panels[slot].sentences = [self.ui["cap_filler_sentence"]]
        e_missing = bool(
            work.last_analysis is not None
            and work.last_analysis.missing.get(PanelSlot.E)
        ) or not work.panels[PanelSlot.E].sentences
        if e_missing:
            self._say(work, actions, self.ui["elaboration_capped"])
            question = Question(
                text=self.ui["cap_emotion_ask"],
                kind=QuestionKind.EMOTION,
                target_slot=PanelSlot.E,
                target_tag="emotion",
            )
            self._ask(work, actions, question)
            return
        self._accept_panels(work)
        self._recompose(work, actions)
        self._say(work, actions, self.ui["elaboration_capped"])
        self._enter_revision_after_strip(work, actions)

    def _accept_panels(self, work: Session) -> None:
        """Close analysis bookkeeping so filled panels count as complete."""
        trouble = work.last_analysis.trouble if work.last_analysis else False
        work.last_analysis = AnalysisResult(trouble=trouble)
        self._refresh_complete_flags(work)

    def _in_elaboration(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        pending = work.pending_question
        if pending is None:
            raise IllegalStateError("elaboration with no pending question")
        if pending.kind is QuestionKind.EMOTION:
            if not isinstance(user_input, EmotionChoiceInput):
                raise ProtocolError(
                    "the emotion question is answered with the emotion buttons",
                    expected=["emotion_choice"],
                )
            labels = [e.value for e in user_input.emotions]
            self._user_turn(
                work,
                ", ".join(labels),
                Modality.BUTTON,
                payload={"emotions": labels},
            )
            work.panels[PanelSlot.E].sentences = [emotion_sentence(user_input.emotions)]
            work.pending_question = None
            if work.elaboration_cycles >= ELABORATION_CYCLE_CAP:
                self._accept_panels(work)
                self._recompose(work, actions)
                self._say(work, actions, self.ui["elaboration_done"])
                self._enter_revision_after_strip(work, actions)
                return
            self._refresh_complete_flags(work)
            self._recompose(work, actions)
            self._elaboration_step(work, actions, entering=False)
            return
        if not isinstance(user_input, UtteranceInput):
            raise ProtocolError(
                "waiting for an answer to the current question",
                expected=["utterance"],
            )
        self._user_turn(work, user_input.text, Modality(user_input.modality))
        replacements = self.pipeline.reconstruct_descriptions(
            work.panels,
            question=pending.text,
            answer=user_input.text,
            target_slot=pending.target_slot,
            target_tag=pending.target_tag,
            keys=self._keys(work),
        )
        self._apply_panel_replacements(work, replacements)
        work.pending_question = None
        self._refresh_complete_flags(work)
        self._recompose(work, actions)
        self._elaboration_step(work, actions, entering=False)

    # -- phase: revision -----------------------------------------------------------

    def _enter_revision_after_strip(
        self, work: Session, actions: list[SystemAction]
    ) -> None:
        work.phase = Phase.REVISION
        work.pending_question = None
        work.pending_fix = False
        self._say(work, actions, self.ui["revision_ask"])

    def _in_revision(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        expected = [
            "button(all_correct)",
            "button(yes)",
            "button(something_to_fix)",
            "button(no)",
            "utterance",
        ]
        if isinstance(user_input, ButtonInput):
            choice = user_input.choice
            if choice in (ButtonChoice.ALL_CORRECT, ButtonChoice.YES):
                self._user_turn(
                    work,
                    self._button_label(choice, None, work),
                    Modality.BUTTON,
                    payload={"choice": choice.value},
                )
                work.pending_fix = False
                self._enter_wrapup(work, actions)
                return
            if choice in (ButtonChoice.SOMETHING_TO_FIX, ButtonChoice.NO):
                self._user_turn(
                    work,
                    self._button_label(choice, None, work),
                    Modality.BUTTON,
                    payload={"choice": choice.value},
                )
                work.pending_fix = True
                self._say(work, actions, self.ui["revision_which_part"])
                return
            raise ProtocolError(
                f"button {choice.value} not valid during revision", expected=expected
            )
        if isinstance(user_input, UtteranceInput):
            self._user_turn(work, user_input.text, Modality(user_input.modality))
            replacements = self.pipeline.apply_panel_modification(
                work.panels, user_input.text, self._keys(work)
            )
            self._apply_panel_replacements(work, replacements)
            work.pending_fix = False
            self._refresh_complete_flags(work)
            self._recompose(work, actions)
            self._say(work, actions, self.ui["revision_recheck"])
            return
        raise ProtocolError("revision expects a button or a change request", expected=expected)

    # -- phase: wrapup ----------------------------------------------------------------

    def _enter_wrapup(self, work: Session, actions: list[SystemAction]) -> None:
        work.phase = Phase.WRAPUP
        context = self._context(work)
        keys = self._keys(work)
        response = self.pipeline.wrapup_response(work.panels, context, keys)
        self._say(work, actions, response)
        titles = self.pipeline.suggest_titles(work.panels, keys)
        work.title_candidates = titles
        self._say(work, actions, self.ui["wrapup_title_ask"])
        actions.append(ShowTitlesAction(titles=titles))

    def _in_wrapup(
        self, work: Session, user_input: UserInput, actions: list[SystemAction]
    ) -> None:
        expected = ["button(title_index)", "button(next)"]
        if isinstance(user_input, ButtonInput):
            if user_input.choice is ButtonChoice.TITLE_INDEX:
                index = user_input.index
                if index is None or index >= len(work.title_candidates):
                    raise ProtocolError(
                        "title_index out of range", expected=["button(title_index 0..2)"]
                    )
                self._user_turn(
                    work,
                    work.title_candidates[index],
                    Modality.BUTTON,
                    payload={"choice": "title_index", "index": index},
                )
                work.pending_title_index = index
                confirm = self.ui["wrapup_title_confirm"].format(
                    title=work.title_candidates[index]
                )
                self._say(work, actions, confirm)
                return
            if user_input.choice is ButtonChoice.NEXT:
                if work.pending_title_index is None:
                    raise ProtocolError(
                        "choose a title before finishing", expected=["button(title_index)"]
                    )
                self._user_turn(
                    work,
                    self._button_label(user_input.choice, None, work),
                    Modality.BUTTON,
                    payload={"choice": "next"},
                )
                self.finalize(work)
                actions.append(AwardStampsAction(count=3))
                return
        raise ProtocolError("wrapup expects a title pick or next", expected=expected)


def articulation_gate(events: list[EventFragment]) -> bool:
    """Enough material for an outline: two or more events."""
    return len(events) >= 2
