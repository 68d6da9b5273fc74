"""Shared builders for scripted-provider tests.

``happy_script`` produces a per-stage default script that can carry any
session from the opening selection to a finalized journal; tests override
or extend pieces of it for the path they exercise.
"""

from __future__ import annotations

from typing import Any

from comicjournal.models import (
    ButtonChoice,
    ButtonInput,
    EmotionChoiceInput,
    PromptType,
    SelectionInput,
    UtteranceInput,
)

ALL_CLEAR = {"trouble": False, "missing": {}, "order_defects": []}

DEFAULT_PANELS = {
    "A": ["Filled panel A."],
    "B": ["Filled panel B."],
    "C": ["Filled panel C."],
    "E": ["I was happy."],
}


def happy_script(
    analyses: list[dict] | None = None,
    events: list[str] | None = None,
    extra_entries: list[dict] | None = None,
    panels: dict | None = None,
) -> dict:
    """Default entries for every stage; ``analyses`` is the story_analyze
    schedule consumed call by call (last repeats)."""
    entries: list[dict[str, Any]] = [
        {
            "stage": "question_articulation",
            "default": True,
            "response": {"text": "What happened?", "kind": "open"},
        },
        {
            "stage": "event_extract",
            "default": True,
            "response": {
                "events": events
                if events is not None
                else ["Something happened first.", "Something happened after."]
            },
        },
        {
            "stage": "reconstruct",
            "default": True,
            "response": {"panels": panels if panels is not None else DEFAULT_PANELS},
        },
        {
            "stage": "story_analyze",
            "default": True,
            "responses": analyses if analyses else [ALL_CLEAR],
        },
        {
            "stage": "question_elaboration",
            "default": True,
            "response": {"text": "Tell me more about that?", "kind": "open"},
        },
        {
            "stage": "wrapup",
            "default": True,
            "response": {"text": "What a day that was!"},
        },
        {
            "stage": "titles",
            "default": True,
            "response": {"titles": ["First title", "Second title", "Third title"]},
        },
        {
            "stage": "scene_elements",
            "default": True,
            "response": {
                "setting": "somewhere",
                "elements": [
                    {"kind": "actor", "label": "I"},
                    {"kind": "actor", "label": "Friend"},
                ],
            },
        },
        {
            "stage": "scene_topology",
            "default": True,
            "response": {"adjacent": [["actor-friend", "actor-i"]]},
        },
    ]
    if extra_entries:
        entries.extend(extra_entries)
    return {"entries": entries}


def select_place(place_id: str = "place-school", people=("person-oliver",)):
    return SelectionInput(
        prompt_type=PromptType.PLACE_PEOPLE_SELECTION,
        place_id=place_id,
        people_ids=list(people),
    )


def select_open_ended():
    return SelectionInput(prompt_type=PromptType.OPEN_ENDED)


def say(text: str, modality: str = "typed"):
    return UtteranceInput(text=text, modality=modality)


def press(choice: str, index: int | None = None):
    return ButtonInput(choice=ButtonChoice(choice), index=index)


def pick_emotions(*names: str):
    return EmotionChoiceInput(emotions=list(names))


def drive(engine, session, inputs):
    """Feed inputs in order; returns (final session, all actions)."""
    all_actions = []
    for item in inputs:
        session, actions = engine.handle_input(session, item)
        all_actions.extend(actions)
    return session, all_actions


HAPPY_INPUTS_TAIL = [
    press("all_correct"),  # outline confirmed
    press("all_correct"),  # strip confirmed in revision
    press("title_index", 0),
    press("next"),
]


def happy_inputs():
    """Input sequence matching happy_script with an all-clear analysis."""
    return [
        select_place(),
        say("We had a great day."),
        *HAPPY_INPUTS_TAIL,
    ]
