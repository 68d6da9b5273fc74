from __future__ import annotations

from xml.dom.minidom import parseString

from comicjournal.models import (
    SLOT_ORDER,
    ElementKind,
    PanelSlot,
    SceneDocument,
    SceneElement,
)
from comicjournal.svg import SIZE, render_scene, render_strip


def scene(
    elements: list[SceneElement],
    setting: str | None = "School",
    slot: PanelSlot = PanelSlot.A,
) -> SceneDocument:
    placements = {}
    free = [(r, c) for r in range(5) for c in range(5)]
    for element in elements:
        placements[element.id] = free.pop(0)
    return SceneDocument(
        slot=slot,
        setting=setting,
        elements=elements,
        placements=placements,
    )


ACTORS = [
    SceneElement(kind=ElementKind.ACTOR, label="I"),
    SceneElement(
        kind=ElementKind.ACTOR,
        label="Oliver",
        emotion="angry",
        dialogue_line="Hey!",
        thought="why though",
        action="told the teacher",
    ),
]
PROPS = [
    SceneElement(kind=ElementKind.OBJECT, label="eraser"),
    SceneElement(kind=ElementKind.CONCEPT, label="homework"),
]


class TestRenderScene:
    def test_is_well_formed_xml(self):
        svg = render_scene(scene(ACTORS + PROPS))
        document = parseString(svg)
        assert document.documentElement.tagName == "svg"
        assert document.documentElement.getAttribute("viewBox") == f"0 0 {SIZE} {SIZE}"

    def test_identical_scenes_identical_bytes(self):
        a = render_scene(scene(ACTORS + PROPS))
        b = render_scene(scene(ACTORS + PROPS))
        assert a == b

    def test_element_order_does_not_matter(self):
        left = scene(ACTORS + PROPS)
        right = scene(ACTORS + PROPS)
        right.elements = list(reversed(right.elements))
        assert render_scene(left) == render_scene(right)

    def test_shapes_per_kind(self):
        svg = render_scene(scene(ACTORS + PROPS))
        assert svg.count('r="22"') == 2  # two actor circles
        assert '<rect x=' in svg and 'width="36"' in svg  # object square
        assert "<polygon" in svg and "stroke-dasharray" in svg  # concept diamond

    def test_actor_annotations_present(self):
        svg = render_scene(scene(ACTORS))
        assert ">angry<" in svg
        assert ">Hey!<" in svg
        assert ">why though<" in svg
        assert ">told the teacher<" in svg
        plain = render_scene(scene([ACTORS[0]]))
        assert 'r="9"' not in plain  # no emotion badge
        assert "italic" not in plain

    def test_labels_escaped(self):
        spiky = SceneElement(kind=ElementKind.OBJECT, label='<b>&"x"')
        svg = render_scene(scene([spiky], setting='A & B <place>'))
        assert "&lt;b&gt;&amp;" in svg
        assert "A &amp; B &lt;place&gt;" in svg
        assert "<b>" not in svg
        parseString(svg)  # still well formed

    def test_long_labels_clipped(self):
        wordy = SceneElement(
            kind=ElementKind.ACTOR, label="an exceedingly verbose label"
        )
        svg = render_scene(scene([wordy]))
        assert "…" in svg
        assert "exceedingly verbose label" not in svg

    def test_empty_scene_is_just_grid(self):
        svg = render_scene(SceneDocument(slot=PanelSlot.E))
        assert svg.count("<line") == 12
        assert "circle" not in svg and "polygon" not in svg

    def test_placement_positions_tokens(self):
        lone = SceneElement(kind=ElementKind.ACTOR, label="I")
        doc = SceneDocument(
            slot=PanelSlot.A, elements=[lone], placements={lone.id: (2, 2)}
        )
        svg = render_scene(doc)
        assert 'cx="160" cy="160"' in svg  # cell (2,2) center

    def test_unplaced_elements_ignored(self):
        doc = SceneDocument(slot=PanelSlot.A, elements=[ACTORS[0]], placements={})
        svg = render_scene(doc)
        assert "circle" not in svg


class TestRenderStrip:
    def scenes(self):
        return {
            PanelSlot.A: scene([ACTORS[0]]),
            PanelSlot.B: scene(PROPS, slot=PanelSlot.B),
            PanelSlot.C: scene(ACTORS, slot=PanelSlot.C),
            PanelSlot.E: scene([], setting=None, slot=PanelSlot.E),
        }

    def test_four_panels_in_slot_order(self):
        svg = render_strip(self.scenes())
        parseString(svg)
        assert svg.count("<g transform=") == 4
        positions = [
            svg.index(f'translate({8 + i * (SIZE + 8)},8)') for i in range(4)
        ]
        assert positions == sorted(positions)

    def test_default_captions_are_slot_names(self):
        svg = render_strip(self.scenes())
        for slot in SLOT_ORDER:
            assert f">{slot.value}<" in svg

    def test_custom_captions(self):
        svg = render_strip(
            self.scenes(), titles={PanelSlot.A: "I played with Oliver."}
        )
        assert ">I played with Oliver.<" in svg
        assert ">B<" in svg  # others fall back

    def test_missing_slot_leaves_blank_panel(self):
        scenes = self.scenes()
        del scenes[PanelSlot.B]
        svg = render_strip(scenes)
        parseString(svg)
        assert svg.count("<g transform=") == 4

    def test_deterministic(self):
        assert render_strip(self.scenes()) == render_strip(self.scenes())
