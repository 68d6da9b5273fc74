/* Renders SceneDocuments into the four-panel strip as SVG markup.
 *
 * The output is a pure function of its inputs: element order, attribute
 * order and number formatting never vary between runs, so rendered strips
 * can be frozen as goldens and compared byte for byte. Every placed
 * element carries data-eid and data-cell attributes for hit testing.
 */

import type { Cell, SceneDocument, SceneElement, Slot } from "./types.js";
import { SLOT_ORDER } from "./types.js";

export const GRID = 5;
export const PANEL = 320;
export const GAP = 8;
const CELL = 56;
const GRID_PAD = (PANEL - GRID * CELL - 24) / 2; // 24px reserved for the caption row

export const STRIP_WIDTH = GAP + SLOT_ORDER.length * (PANEL + GAP);
export const STRIP_HEIGHT = PANEL + 2 * GAP;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/* Labels longer than the cell is wide get clipped, not wrapped. */
function clip(text: string, max: number): string {
  return text.length > max ? text.slice(0, max - 1) + "…" : text;
}

function cellCenter(cell: Cell): [number, number] {
  const [row, col] = cell;
  return [GRID_PAD + col * CELL + CELL / 2, GRID_PAD + row * CELL + CELL / 2];
}

function gridLines(): string {
  const size = GRID * CELL;
  const parts: string[] = [];
  for (let i = 0; i <= GRID; i++) {
    const offset = GRID_PAD + i * CELL;
    parts.push(
      `<line x1="${GRID_PAD}" y1="${offset}" x2="${GRID_PAD + size}" y2="${offset}" class="grid"/>`,
      `<line x1="${offset}" y1="${GRID_PAD}" x2="${offset}" y2="${GRID_PAD + size}" class="grid"/>`,
    );
  }
  return parts.join("");
}

function actorAnnotations(element: SceneElement, cx: number, cy: number): string {
  const parts: string[] = [];
  if (element.emotion !== null) {
    parts.push(
      `<g class="emotion"><circle cx="${cx + 20}" cy="${cy - 24}" r="8"/>` +
        `<text x="${cx + 20}" y="${cy - 36}" class="badge">${esc(clip(element.emotion, 10))}</text></g>`,
    );
  }
  if (element.dialogue_line !== null) {
    parts.push(
      `<g class="speech"><rect x="${cx - 42}" y="${cy - 54}" width="84" height="16" rx="7"/>` +
        `<path d="M ${cx - 4} ${cy - 38} l 4 8 l 4 -8 z"/>` +
        `<text x="${cx}" y="${cy - 42}">${esc(clip(element.dialogue_line, 16))}</text></g>`,
    );
  }
  if (element.thought !== null) {
    parts.push(
      `<g class="thought"><ellipse cx="${cx - 24}" cy="${cy - 48}" rx="34" ry="10"/>` +
        `<text x="${cx - 24}" y="${cy - 45}">${esc(clip(element.thought, 14))}</text></g>`,
    );
  }
  if (element.action !== null) {
    parts.push(
      `<text x="${cx}" y="${cy + 34}" class="action">${esc(clip(element.action, 14))}</text>`,
    );
  }
  return parts.join("");
}

function renderElement(element: SceneElement, cell: Cell): string {
  const [cx, cy] = cellCenter(cell);
  const label = `<text x="${cx}" y="${cy + 24}" class="label">${esc(clip(element.label, 12))}</text>`;
  let glyph: string;
  if (element.kind === "actor") {
    glyph = `<circle cx="${cx}" cy="${cy - 4}" r="18"/>`;
  } else if (element.kind === "object") {
    glyph = `<rect x="${cx - 15}" y="${cy - 19}" width="30" height="30" rx="4"/>`;
  } else {
    glyph =
      `<path d="M ${cx} ${cy - 22} L ${cx + 18} ${cy - 4} L ${cx} ${cy + 14} ` +
      `L ${cx - 18} ${cy - 4} Z" stroke-dasharray="4 3"/>`;
  }
  const extras = element.kind === "actor" ? actorAnnotations(element, cx, cy) : "";
  const [row, col] = cell;
  return (
    `<g class="element element-${element.kind}" data-eid="${esc(element.id)}" ` +
    `data-cell="${row},${col}">${glyph}${label}${extras}</g>`
  );
}

/** One panel. An empty scene renders as a blank panel: frame, grid and
 * caption only, flagged with the panel-empty class. */
export function renderPanel(scene: SceneDocument, caption: string): string {
  const empty = scene.elements.length === 0;
  const parts: string[] = [
    `<rect x="0" y="0" width="${PANEL}" height="${PANEL}" class="frame"/>`,
    gridLines(),
  ];
  if (scene.setting !== null) {
    parts.push(`<text x="${GRID_PAD}" y="14" class="setting">${esc(clip(scene.setting, 24))}</text>`);
  }
  // canonical paint order: by grid cell, then id, so equal scenes render
  // to equal bytes regardless of element list order
  const placed = scene.elements
    .filter((el) => scene.placements[el.id] !== undefined)
    .sort((a, b) => {
      const ca = scene.placements[a.id] as Cell;
      const cb = scene.placements[b.id] as Cell;
      return ca[0] - cb[0] || ca[1] - cb[1] || (a.id < b.id ? -1 : 1);
    });
  for (const el of placed) {
    parts.push(renderElement(el, scene.placements[el.id] as Cell));
  }
  parts.push(
    `<text x="${PANEL / 2}" y="${PANEL - 8}" class="caption">${esc(clip(caption, 40))}</text>`,
  );
  return `<g class="panel${empty ? " panel-empty" : ""}" data-slot="${scene.slot}">${parts.join("")}</g>`;
}

/** The full four-panel strip at a fixed viewport. Captions default to the
 * slot names; callers may pass panel sentences instead. */
export function renderStrip(
  scenes: Record<Slot, SceneDocument>,
  captions?: Partial<Record<Slot, string>>,
): string {
  const panels = SLOT_ORDER.map((slot, i) => {
    const x = GAP + i * (PANEL + GAP);
    const caption = captions?.[slot] ?? slot;
    return `<g transform="translate(${x},${GAP})">${renderPanel(scenes[slot], caption)}</g>`;
  });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${STRIP_WIDTH} ${STRIP_HEIGHT}" ` +
    `width="${STRIP_WIDTH}" height="${STRIP_HEIGHT}" class="strip">` +
    `<style>` +
    `.frame{fill:#fffdf5;stroke:#2b2b2b;stroke-width:2}` +
    `.grid{stroke:#e3ddcc;stroke-width:1}` +
    `.element circle,.element rect,.element path{fill:#f6e9c9;stroke:#4a4a4a;stroke-width:1.5}` +
    `.label{font:11px sans-serif;text-anchor:middle;fill:#2b2b2b}` +
    `.setting{font:10px sans-serif;fill:#7a7263}` +
    `.caption{font:12px sans-serif;text-anchor:middle;fill:#2b2b2b}` +
    `.badge{font:9px sans-serif;text-anchor:middle;fill:#a33}` +
    `.emotion circle{fill:#ffd9d9;stroke:#a33;stroke-width:1}` +
    `.speech rect,.speech path{fill:#fff;stroke:#4a4a4a;stroke-width:1}` +
    `.speech text{font:9px sans-serif;text-anchor:middle;fill:#2b2b2b}` +
    `.thought ellipse{fill:#fff;stroke:#4a4a4a;stroke-width:1;stroke-dasharray:3 3}` +
    `.thought text{font:8px sans-serif;text-anchor:middle;fill:#555}` +
    `.action{font:9px italic sans-serif;text-anchor:middle;fill:#555}` +
    `</style>` +
    panels.join("") +
    `</svg>`
  );
}

/** Grid cell an element was rendered into, read back out of the markup.
 * Returns null when the element is not in the panel. */
export function renderedCell(svg: string, elementId: string): Cell | null {
  const escaped = elementId.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
  const match = svg.match(
    new RegExp(`data-eid="${escaped}" data-cell="(\\d+),(\\d+)"`),
  );
  if (match === null) return null;
  return [Number(match[1]), Number(match[2])];
}
