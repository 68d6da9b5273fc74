from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from pydantic import TypeAdapter, ValidationError

from comicjournal.models import (
    EMOTIONS,
    PHASE_ORDER,
    SLOT_ORDER,
    AnalysisResult,
    ButtonInput,
    ElementKind,
    EmotionChoiceInput,
    EventFragment,
    Modality,
    PanelSlot,
    Phase,
    Question,
    QuestionKind,
    Role,
    SceneDocument,
    SceneElement,
    Session,
    Turn,
    UserInput,
    canonical_json,
    checksum,
    element_id,
    empty_scene,
    phase_index,
    pretty_json,
    slugify,
    to_jsonable,
    validate,
)

T0 = datetime(2026, 2, 2, 10, 0, 0, tzinfo=timezone.utc)


def fresh_session() -> Session:
    return Session(id="s-1", profile_id="p-1", peer_id="peer-1", created_at=T0)


def turn(role=Role.SYSTEM, text="hi", phase=Phase.PREPARATION, at=T0, **kw) -> Turn:
    return Turn(
        role=role, text=text, phase=phase, modality=Modality.TYPED, timestamp=at, **kw
    )


class TestVocabulary:
    def test_phase_order_is_total_and_monotone(self):
        assert len(PHASE_ORDER) == 7
        indices = [phase_index(p) for p in PHASE_ORDER]
        assert indices == sorted(indices)
        assert phase_index(Phase.PREPARATION) == 0
        assert phase_index(Phase.FINALIZED) == 6

    def test_slot_order(self):
        assert [s.value for s in SLOT_ORDER] == ["A", "B", "C", "E"]

    def test_twelve_emotions(self):
        assert len(EMOTIONS) == 12
        assert len(set(EMOTIONS)) == 12

    def test_slugify(self):
        assert slugify("  Actor  Label ") == "actor-label"
        assert slugify("A\tB\nC") == "a-b-c"

    def test_element_id(self):
        assert element_id("actor", "Oliver") == "actor-oliver"
        assert element_id(ElementKind.OBJECT, "red eraser") == "object-red-eraser"


class TestTurn:
    def test_button_turn_requires_payload(self):
        with pytest.raises(ValidationError):
            Turn(
                role=Role.ADOLESCENT,
                text="Yes",
                phase=Phase.REVISION,
                modality=Modality.BUTTON,
                timestamp=T0,
            )

    def test_button_turn_with_payload_ok(self):
        t = Turn(
            role=Role.ADOLESCENT,
            text="Yes",
            phase=Phase.REVISION,
            modality=Modality.BUTTON,
            timestamp=T0,
            payload={"choice": "yes"},
        )
        assert t.payload == {"choice": "yes"}


class TestAnalysisResult:
    def test_all_slots_filled_in(self):
        a = AnalysisResult(trouble=False)
        assert set(a.missing) == set(SLOT_ORDER)
        assert a.all_clear()

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValidationError):
            AnalysisResult(trouble=False, missing={PanelSlot.A: ["weather"]})

    def test_incomplete_slots_in_slot_order(self):
        a = AnalysisResult(
            trouble=True,
            missing={PanelSlot.E: ["emotion"], PanelSlot.B: ["cause", "action"]},
        )
        assert a.incomplete_slots() == [PanelSlot.B, PanelSlot.E]
        assert not a.all_clear()

    def test_order_defects_block_all_clear(self):
        a = AnalysisResult(
            trouble=False,
            order_defects=[{"slot": "A", "description": "out of order"}],
        )
        assert not a.all_clear()


class TestQuestion:
    def test_emotion_question_must_target_e(self):
        with pytest.raises(ValidationError):
            Question(text="How did you feel?", kind=QuestionKind.EMOTION,
                     target_slot=PanelSlot.B, target_tag="emotion")
        q = Question(text="How did you feel?", kind=QuestionKind.EMOTION,
                     target_slot=PanelSlot.E, target_tag="emotion")
        assert q.target_slot is PanelSlot.E


class TestSceneElement:
    def test_id_is_derived(self):
        el = SceneElement(kind=ElementKind.ACTOR, label="Oliver")
        assert el.id == "actor-oliver"

    def test_actor_attributes_rejected_on_objects(self):
        with pytest.raises(ValidationError):
            SceneElement(kind=ElementKind.OBJECT, label="eraser", emotion="sad")
        with pytest.raises(ValidationError):
            SceneElement(kind=ElementKind.CONCEPT, label="rain", dialogue_line="hi")

    def test_actor_attributes_allowed_on_actors(self):
        el = SceneElement(
            kind=ElementKind.ACTOR, label="Oliver", emotion="angry",
            action="told the teacher",
        )
        assert el.emotion == "angry"


class TestSceneDocument:
    def test_empty_scene(self):
        doc = empty_scene(PanelSlot.B)
        assert doc.is_empty()
        assert doc.slot is PanelSlot.B

    def test_not_empty_with_elements(self):
        doc = SceneDocument(
            slot=PanelSlot.A,
            elements=[SceneElement(kind=ElementKind.ACTOR, label="I")],
            placements={"actor-i": (2, 2)},
        )
        assert not doc.is_empty()


class TestUserInputUnion:
    adapter: TypeAdapter = TypeAdapter(UserInput)

    def test_discriminates_on_kind(self):
        parsed = self.adapter.validate_python({"kind": "utterance", "text": "hey"})
        assert parsed.text == "hey"
        parsed = self.adapter.validate_python(
            {"kind": "button", "choice": "title_index", "index": 2}
        )
        assert isinstance(parsed, ButtonInput)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            self.adapter.validate_python({"kind": "poke"})

    def test_emotion_choice_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            EmotionChoiceInput(emotions=["sad", "sad"])

    def test_emotion_choice_rejects_unknown_emotion(self):
        with pytest.raises(ValidationError):
            EmotionChoiceInput(emotions=["melancholic"])

    def test_button_index_rules(self):
        with pytest.raises(ValidationError):
            ButtonInput(choice="title_index")  # needs index
        with pytest.raises(ValidationError):
            ButtonInput(choice="title_index", index=3)  # out of range
        with pytest.raises(ValidationError):
            ButtonInput(choice="yes", index=0)  # index not allowed


class TestCanonicalJson:
    def test_key_order_invariance(self):
        a = {"b": 1, "a": [2, 3]}
        b = {"a": [2, 3], "b": 1}
        assert canonical_json(a) == canonical_json(b)

    def test_compact_and_unicode(self):
        text = canonical_json({"t": "héllo", "n": 2})
        assert text == '{"n":2,"t":"héllo"}'

    def test_model_round_trip_is_stable(self):
        s = fresh_session()
        first = canonical_json(s)
        again = canonical_json(Session.model_validate_json(first))
        assert first == again

    def test_pretty_json_ends_with_newline(self):
        assert pretty_json({"a": 1}).endswith("\n")

    def test_checksum_is_sha256_hex(self):
        value = checksum("abc")
        assert len(value) == 64
        assert value == checksum("abc")
        assert value != checksum("abd")

    def test_to_jsonable_dumps_models(self):
        dumped = to_jsonable(EventFragment(text="x.", source_turn=0))
        assert dumped == {"text": "x.", "source_turn": 0}


class TestValidate:
    def test_fresh_session_has_no_violations(self):
        assert validate(fresh_session()) == []

    def test_title_only_when_finalized(self):
        s = fresh_session()
        s.title = "Too early"
        assert any("title" in v for v in validate(s))

    def test_finalized_requires_title_and_stamps(self):
        s = fresh_session()
        s.phase = Phase.FINALIZED
        for slot in SLOT_ORDER:
            s.panels[slot].sentences = ["Done."]
            s.panels[slot].complete = True
        violations = validate(s)
        assert any("title" in v for v in violations)
        assert any("stamp" in v for v in violations)

    def test_stamps_before_finalize_flagged(self):
        s = fresh_session()
        s.stamps_awarded = 3
        assert any("stamp" in v for v in violations_text(s))

    def test_timestamps_must_not_decrease(self):
        s = fresh_session()
        s.turns = [turn(at=T0 + timedelta(seconds=5)), turn(at=T0)]
        assert any("timestamp" in v for v in validate(s))

    def test_event_source_turn_range(self):
        s = fresh_session()
        s.events = [EventFragment(text="x.", source_turn=7)]
        assert any("source_turn" in v for v in validate(s))

    def test_panel_complete_flag_consistency(self):
        s = fresh_session()
        s.panels[PanelSlot.A].complete = True  # but no sentences
        assert any("complete" in v for v in validate(s))

    def test_scene_placement_bounds_and_collisions(self):
        s = fresh_session()
        el1 = SceneElement(kind=ElementKind.ACTOR, label="I")
        el2 = SceneElement(kind=ElementKind.ACTOR, label="Oliver")
        s.scenes[PanelSlot.A] = SceneDocument(
            slot=PanelSlot.A,
            elements=[el1, el2],
            placements={"actor-i": (2, 2), "actor-oliver": (2, 2)},
        )
        assert any("collision" in v for v in validate(s))

        s.scenes[PanelSlot.A].placements = {"actor-i": (5, 0), "actor-oliver": (0, 0)}
        assert any("bounds" in v or "outside" in v for v in validate(s))

    def test_scene_unplaced_element_flagged(self):
        s = fresh_session()
        s.scenes[PanelSlot.A] = SceneDocument(
            slot=PanelSlot.A,
            elements=[SceneElement(kind=ElementKind.ACTOR, label="I")],
            placements={},
        )
        assert any("placed" in v for v in validate(s))

    def test_too_many_title_candidates(self):
        s = fresh_session()
        s.title_candidates = ["a", "b", "c", "d"]
        assert validate(s)


def violations_text(s: Session) -> list[str]:
    return validate(s)
