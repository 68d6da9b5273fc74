/* The emotion card grid. Cards come from the server's
 * show_emotion_buttons action; the client adds no emotions of its own and
 * submits the selection in tap order. */

import type { EmotionChoiceInput } from "./types.js";

export interface EmotionGrid {
  cards: string[];
  selected: string[];
}

export function createGrid(cards: string[]): EmotionGrid {
  return { cards: [...cards], selected: [] };
}

/** Tap a card: select it, or deselect it when already chosen. Labels the
 * server never offered are ignored outright. */
export function toggle(grid: EmotionGrid, label: string): EmotionGrid {
  if (!grid.cards.includes(label)) return grid;
  const selected = grid.selected.includes(label)
    ? grid.selected.filter((item) => item !== label)
    : [...grid.selected, label];
  return { cards: grid.cards, selected };
}

/** The input to submit, or null while nothing is selected. */
export function toInput(grid: EmotionGrid): EmotionChoiceInput | null {
  if (grid.selected.length === 0) return null;
  return { kind: "emotion_choice", emotions: [...grid.selected] };
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** One button per card, in server order, with pressed state reflected.
 * Deterministic markup so the grid can be snapshot as a frozen golden. */
export function renderGrid(grid: EmotionGrid): string {
  const buttons = grid.cards.map((label) => {
    const pressed = grid.selected.includes(label);
    return (
      `<button type="button" class="emotion-card" data-emotion="${esc(label)}" ` +
      `aria-pressed="${pressed}">${esc(label)}</button>`
    );
  });
  return `<div class="emotion-grid" role="group">${buttons.join("")}</div>`;
}
