"""Deterministic SVG rendering of a composed panel scene.

One panel maps to a 320x320 viewBox; each 5x5 grid cell is 64 units.
Element kinds get distinct shapes so the strip stays readable without
color: actors are circles, objects are squares, concepts are dashed
diamonds.  Actor attributes render as small annotations around the
token.  Output depends only on the scene document, with elements drawn
in sorted-id order, so identical scenes yield identical bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .models import ElementKind, SceneDocument, SceneElement

CELL = 64
SIZE = 5 * CELL


def _cell_center(row: int, col: int) -> tuple[int, int]:
    return col * CELL + CELL // 2, row * CELL + CELL // 2


def _clip(text: str, limit: int) -> str:
    text = text.strip()
    if len(text) <= limit:
        return text
    return text[: limit - 1].rstrip() + "…"


def _token(element: SceneElement, x: int, y: int) -> list[str]:
    parts: list[str] = []
    if element.kind is ElementKind.ACTOR:
        parts.append(
            f'<circle cx="{x}" cy="{y}" r="22" fill="#fde9c8" stroke="#333" stroke-width="2"/>'
        )
    elif element.kind is ElementKind.OBJECT:
        parts.append(
            f'<rect x="{x - 18}" y="{y - 18}" width="36" height="36" rx="4" '
            f'fill="#d7e8f7" stroke="#333" stroke-width="2"/>'
        )
    else:
        points = f"{x},{y - 22} {x + 22},{y} {x},{y + 22} {x - 22},{y}"
        parts.append(
            f'<polygon points="{points}" fill="#eee5f5" stroke="#333" '
            f'stroke-width="2" stroke-dasharray="4 3"/>'
        )
    parts.append(
        f'<text x="{x}" y="{y + 36}" font-size="11" text-anchor="middle" '
        f'fill="#222">{escape(_clip(element.label, 14))}</text>'
    )
    return parts


def _actor_annotations(element: SceneElement, x: int, y: int) -> list[str]:
    parts: list[str] = []
    if element.emotion is not None:
        parts.append(
            f'<circle cx="{x + 18}" cy="{y - 18}" r="9" fill="#ffd44d" '
            f'stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x + 18}" y="{y - 30}" font-size="9" text-anchor="middle" '
            f'fill="#555">{escape(element.emotion)}</text>'
        )
    if element.dialogue_line:
        parts.append(
            f'<rect x="{x - 28}" y="{y - 52}" width="56" height="16" rx="8" '
            f'fill="#fff" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x}" y="{y - 40}" font-size="9" text-anchor="middle" '
            f'fill="#111">{escape(_clip(element.dialogue_line, 12))}</text>'
        )
    if element.thought:
        parts.append(
            f'<ellipse cx="{x - 24}" cy="{y - 46}" rx="26" ry="11" fill="#fff" '
            f'stroke="#888" stroke-width="1" stroke-dasharray="2 2"/>'
        )
        parts.append(
            f'<text x="{x - 24}" y="{y - 43}" font-size="8" text-anchor="middle" '
            f'fill="#555">{escape(_clip(element.thought, 12))}</text>'
        )
    if element.action:
        parts.append(
            f'<text x="{x}" y="{y + 48}" font-size="9" font-style="italic" '
            f'text-anchor="middle" fill="#444">{escape(_clip(element.action, 18))}</text>'
        )
    return parts


def render_scene(scene: SceneDocument) -> str:
    """Render one scene as a standalone SVG document string."""
    parts: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" '
        f'width="{SIZE}" height="{SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#fffdf6"/>',
    ]
    for i in range(6):
        offset = i * CELL
        parts.append(
            f'<line x1="{offset}" y1="0" x2="{offset}" y2="{SIZE}" '
            f'stroke="#e4ddcd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="0" y1="{offset}" x2="{SIZE}" y2="{offset}" '
            f'stroke="#e4ddcd" stroke-width="1"/>'
        )
    label = scene.setting or ""
    if label:
        parts.append(
            f'<text x="6" y="16" font-size="12" fill="#666">{escape(_clip(label, 40))}</text>'
        )
    by_id = {element.id: element for element in scene.elements}
    for element_id in sorted(scene.placements):
        element = by_id.get(element_id)
        if element is None:
            continue
        row, col = scene.placements[element_id]
        x, y = _cell_center(row, col)
        parts.extend(_token(element, x, y))
        if element.kind is ElementKind.ACTOR:
            parts.extend(_actor_annotations(element, x, y))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_strip(scenes: dict, titles: dict | None = None) -> str:
    """Four panels side by side in slot order; optional per-slot captions."""
    from .models import SLOT_ORDER

    gap = 8
    width = 4 * SIZE + 5 * gap
    height = SIZE + 2 * gap + 18
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#f3efe4"/>',
    ]
    for i, slot in enumerate(SLOT_ORDER):
        x = gap + i * (SIZE + gap)
        scene = scenes.get(slot)
        inner = render_scene(scene) if scene is not None else ""
        parts.append(f'<g transform="translate({x},{gap})">')
        if inner:
            # strip outer svg element, keep the drawing
            body = inner.split("\n", 1)[1].rsplit("</svg>", 1)[0]
            parts.append(body.rstrip())
        parts.append("</g>")
        caption = (titles or {}).get(slot, slot.value)
        parts.append(
            f'<text x="{x + SIZE // 2}" y="{gap + SIZE + 14}" font-size="12" '
            f'text-anchor="middle" fill="#333">{escape(str(caption))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
