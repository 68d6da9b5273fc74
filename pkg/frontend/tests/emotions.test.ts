import { describe, expect, it } from "vitest";

import { createGrid, renderGrid, toInput, toggle } from "../src/emotions.js";

// The card set always arrives from the server's show_emotion_buttons
// action; this is the fixed list it sends.
const TWELVE = [
  "joyful",
  "glad",
  "happy",
  "excited",
  "sad",
  "angry",
  "upset",
  "scared",
  "afraid",
  "surprised",
  "amazed",
  "bored",
];

describe("emotion grid", () => {
  it("shows exactly 12 cards, in server order", () => {
    const markup = renderGrid(createGrid(TWELVE));
    const cards = markup.match(/class="emotion-card"/g) ?? [];
    expect(cards.length).toBe(12);
    const order = [...markup.matchAll(/data-emotion="([a-z]+)"/g)].map((m) => m[1]);
    expect(order).toEqual(TWELVE);
  });

  it("toggles selection and keeps tap order", () => {
    let grid = createGrid(TWELVE);
    grid = toggle(grid, "scared");
    grid = toggle(grid, "sad");
    expect(grid.selected).toEqual(["scared", "sad"]);
    grid = toggle(grid, "scared");
    expect(grid.selected).toEqual(["sad"]);
  });

  it("ignores labels the server never offered", () => {
    let grid = createGrid(TWELVE);
    grid = toggle(grid, "furious");
    expect(grid.selected).toEqual([]);
  });

  it("submits nothing while the selection is empty", () => {
    const grid = createGrid(TWELVE);
    expect(toInput(grid)).toBeNull();
    expect(toInput(toggle(grid, "sad"))).toEqual({
      kind: "emotion_choice",
      emotions: ["sad"],
    });
  });

  it("marks pressed cards in the markup", () => {
    const grid = toggle(createGrid(TWELVE), "sad");
    const markup = renderGrid(grid);
    expect(markup).toContain('data-emotion="sad" aria-pressed="true"');
    expect(markup).toContain('data-emotion="glad" aria-pressed="false"');
  });
});
