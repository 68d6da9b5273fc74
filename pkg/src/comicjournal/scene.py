"""Scene composition: panel text to placed comic-panel elements.

Three steps per panel: element extraction and adjacency topology go
through the gateway; placement is pure local code (:mod:`placement`).
Strip composition is incremental: a panel is recomposed only when its
description changed since the last composition, so unchanged panels stay
byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gateway import (
    Gateway,
    SceneElementsResponse,
    Stage,
    StageError,
    StageRequest,
    TemplateRegistry,
    TopologyResponse,
)
from .models import (
    MAX_SCENE_ELEMENTS,
    SLOT_ORDER,
    ElementKind,
    PanelDescription,
    PanelSlot,
    SceneDocument,
    SceneElement,
    checksum,
    empty_scene,
)
from .pipeline import KeyInputs, PipelineContext
from .placement import place_elements


def description_fingerprint(sentences: list[str]) -> str:
    return checksum("\x1f".join(sentences))


def _truncate_elements(elements: list[SceneElement]) -> list[SceneElement]:
    """Cap at 8 per panel, actors first, provider order otherwise; drops
    duplicate ids keeping the first occurrence."""
    seen: set[str] = set()
    unique: list[SceneElement] = []
    for el in elements:
        if el.id in seen:
            continue
        seen.add(el.id)
        unique.append(el)
    actors = [el for el in unique if el.kind is ElementKind.ACTOR]
    others = [el for el in unique if el.kind is not ElementKind.ACTOR]
    return (actors + others)[:MAX_SCENE_ELEMENTS]


@dataclass
class StripComposition:
    scenes: dict[PanelSlot, SceneDocument]
    fingerprints: dict[PanelSlot, str]
    errors: dict[PanelSlot, StageError] = field(default_factory=dict)


class SceneComposer:
    def __init__(self, gateway: Gateway, templates: TemplateRegistry):
        self.gateway = gateway
        self.templates = templates

    def extract_elements(
        self,
        slot: PanelSlot,
        sentences: list[str],
        context: PipelineContext,
        keys: KeyInputs,
    ) -> tuple[str | None, list[SceneElement]]:
        prompt = self.templates.render(
            Stage.SCENE_ELEMENTS,
            slot=slot.value,
            sentences=" ".join(sentences),
            place=context.place_label(),
            people=context.people_label(),
        )
        request = StageRequest(
            stage=Stage.SCENE_ELEMENTS,
            rendered_prompt=prompt,
            response_schema_id="scene_elements_v1",
            match_key=keys.key(Stage.SCENE_ELEMENTS),
        )
        value: SceneElementsResponse = self.gateway.complete_structured(request)
        return value.setting, _truncate_elements(value.elements)

    def compute_topology(
        self,
        elements: list[SceneElement],
        sentences: list[str],
        keys: KeyInputs,
    ) -> list[tuple[str, str]]:
        if len(elements) < 2:
            return []
        ids = {el.id for el in elements}

        def check(value: TopologyResponse) -> str | None:
            for a, b in value.adjacent:
                if a == b:
                    return f"self-pair {a!r}"
                if a not in ids or b not in ids:
                    unknown = a if a not in ids else b
                    return f"unknown element id {unknown!r} (known: {sorted(ids)})"
            return None

        prompt = self.templates.render(
            Stage.SCENE_TOPOLOGY,
            elements="\n".join(f"{el.id} ({el.kind.value}: {el.label})" for el in elements),
            sentences=" ".join(sentences),
        )
        request = StageRequest(
            stage=Stage.SCENE_TOPOLOGY,
            rendered_prompt=prompt,
            response_schema_id="scene_topology_v1",
            match_key=keys.key(Stage.SCENE_TOPOLOGY),
        )
        value: TopologyResponse = self.gateway.complete_structured(request, extra_check=check)
        # normalize: unordered pairs, deduplicated, deterministic order
        seen: set[tuple[str, str]] = set()
        pairs: list[tuple[str, str]] = []
        for a, b in value.adjacent:
            pair = (a, b) if a <= b else (b, a)
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
        return pairs

    def compose_scene(
        self,
        slot: PanelSlot,
        sentences: list[str],
        context: PipelineContext,
        keys: KeyInputs,
    ) -> SceneDocument:
        if not sentences:
            return empty_scene(slot)
        setting, elements = self.extract_elements(slot, sentences, context, keys)
        adjacencies = self.compute_topology(elements, sentences, keys)
        result = place_elements(elements, adjacencies)
        return SceneDocument(
            slot=slot,
            setting=setting,
            elements=elements,
            adjacencies=adjacencies,
            placements=result.placements,
            unsatisfied=result.unsatisfied,
        )

    def compose_strip(
        self,
        panels: dict[PanelSlot, PanelDescription],
        context: PipelineContext,
        previous: dict[PanelSlot, SceneDocument],
        fingerprints: dict[PanelSlot, str],
        keys: KeyInputs,
    ) -> StripComposition:
        """Compose all four slots, reusing unchanged ones byte-identically.

        Per-slot stage errors are collected rather than aborting the other
        slots; the failed slot keeps its previous scene and fingerprint.
        """
        scenes: dict[PanelSlot, SceneDocument] = {}
        new_fps: dict[PanelSlot, str] = {}
        errors: dict[PanelSlot, StageError] = {}
        for slot in SLOT_ORDER:
            sentences = panels[slot].sentences
            fp = description_fingerprint(sentences)
            if fingerprints.get(slot) == fp and slot in previous:
                scenes[slot] = previous[slot].model_copy(deep=True)
                new_fps[slot] = fp
                continue
            try:
                scenes[slot] = self.compose_scene(slot, sentences, context, keys)
                new_fps[slot] = fp
            except StageError as exc:
                errors[slot] = exc
                scenes[slot] = (
                    previous[slot].model_copy(deep=True)
                    if slot in previous
                    else empty_scene(slot)
                )
                if slot in fingerprints:
                    new_fps[slot] = fingerprints[slot]
        return StripComposition(scenes=scenes, fingerprints=new_fps, errors=errors)
