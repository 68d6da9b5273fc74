import { describe, expect, it } from "vitest";

import { affordance } from "../src/controls.js";
import { applyExchange, buildView, foldAction } from "../src/view.js";
import { SLOT_ORDER } from "../src/types.js";
import type {
  Modality,
  PanelDescription,
  Phase,
  Role,
  SceneDocument,
  SessionPayload,
  SessionView,
  Slot,
  SystemAction,
  Turn,
} from "../src/types.js";

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

function emptyPanel(slot: Slot): PanelDescription {
  return { slot, sentences: [], complete: false };
}

function emptyScene(slot: Slot): SceneDocument {
  return { slot, setting: null, elements: [], adjacencies: [], placements: {}, unsatisfied: [] };
}

function makeSession(overrides: Partial<SessionView> = {}): SessionView {
  const panels = {} as Record<Slot, PanelDescription>;
  const scenes = {} as Record<Slot, SceneDocument>;
  for (const slot of SLOT_ORDER) {
    panels[slot] = emptyPanel(slot);
    scenes[slot] = emptyScene(slot);
  }
  return {
    id: "s-0001",
    profile_id: "adol-ethan",
    peer_id: "peer-milo",
    phase: "preparation",
    prompt_type: null,
    turns: [],
    panels,
    scenes,
    title_candidates: [],
    title: null,
    stamps_awarded: 0,
    pending_question: null,
    pending_fix: false,
    pending_title_index: null,
    ...overrides,
  };
}

function turn(role: Role, phase: Phase, modality: Modality, text = ""): Turn {
  return { role, text, phase, modality, timestamp: "2026-02-02T10:00:00+00:00", payload: null };
}

function say(text: string): SystemAction {
  return { kind: "say", text, tts_request: null };
}

describe("view state", () => {
  it("reconstructs the identical view after a mid-elaboration refresh", () => {
    // Three exchanges on the way into elaboration, the way the live client
    // sees them: a fresh session snapshot plus the actions of that exchange.
    const stripScenes = makeSession().scenes;
    const exchanges: SessionPayload[] = [
      {
        session: makeSession({ phase: "articulation", turns: [turn("system", "articulation", "typed", "Tell me more.")] }),
        actions: [say("Got it."), say("Tell me more.")],
      },
      {
        session: makeSession({ phase: "verification" }),
        actions: [say("Here is your story."), { kind: "show_outline", lines: ["first", "second"] }, { kind: "show_strip", scenes: stripScenes }],
      },
      {
        session: makeSession({
          phase: "elaboration",
          pending_question: {
            text: "How did you feel?",
            kind: "emotion",
            target_slot: "E",
            target_tag: "emotion",
            focus: null,
          },
        }),
        actions: [say("How did you feel?"), { kind: "show_strip", scenes: stripScenes }, { kind: "show_emotion_buttons", emotions: TWELVE }],
      },
    ];

    let live = buildView(makeSession(), []);
    for (const exchange of exchanges) {
      live = applyExchange(live, exchange);
    }

    // A refresh refetches the session and replays the full action backlog.
    const backlog = exchanges.flatMap((exchange) => exchange.actions);
    const lastSession = exchanges[exchanges.length - 1]!.session;
    const refreshed = buildView(lastSession, backlog);

    expect(refreshed).toEqual(live);
    expect(refreshed.emotionCards).toEqual(TWELVE);
    expect(refreshed.outline).toEqual(["first", "second"]);
    expect(refreshed.scenes).toEqual(stripScenes);
    expect(refreshed.cursor).toBe(backlog.length);
    expect(affordance(refreshed.session)).toEqual(affordance(live.session));
  });

  it("keeps the outline from an earlier exchange across a refresh", () => {
    // The latest exchange did not resend the outline; replaying the backlog
    // still restores it.
    const backlog: SystemAction[] = [
      { kind: "show_outline", lines: ["only once"] },
      say("Anything else?"),
    ];
    const state = buildView(makeSession({ phase: "elaboration" }), backlog);
    expect(state.outline).toEqual(["only once"]);
  });

  it("accumulates stamps and clears notices on the next action", () => {
    let state = buildView(makeSession(), []);
    state = foldAction(state, { kind: "error_notice", text: "try again", retryable: true });
    expect(state.notice).toBe("try again");
    state = foldAction(state, { kind: "award_stamps", count: 3 });
    expect(state.notice).toBeNull();
    expect(state.stamps).toBe(3);
    state = foldAction(state, { kind: "award_stamps", count: 2 });
    expect(state.stamps).toBe(5);
    expect(state.cursor).toBe(3);
  });

  it("takes the transcript from the session, not from say actions", () => {
    const state = buildView(makeSession(), [say("never shown twice")]);
    expect(state.session.turns).toEqual([]);
  });
});

describe("affordances", () => {
  it("offers the selection screen during preparation", () => {
    expect(affordance(makeSession())).toEqual({ kind: "selection" });
  });

  it("offers free text during articulation", () => {
    expect(affordance(makeSession({ phase: "articulation" }))).toEqual({ kind: "text" });
  });

  it("offers the two check buttons during verification", () => {
    const a = affordance(makeSession({ phase: "verification" }));
    expect(a.kind).toBe("buttons");
    if (a.kind === "buttons") {
      expect(a.buttons.map((b) => b.choice)).toEqual(["all_correct", "something_to_fix"]);
    }
  });

  it("switches verification to text while a fix is pending", () => {
    expect(affordance(makeSession({ phase: "verification", pending_fix: true }))).toEqual({
      kind: "text",
    });
  });

  it("shows the emotion cards only for a pending emotion question", () => {
    const emotion = makeSession({
      phase: "elaboration",
      pending_question: { text: "?", kind: "emotion", target_slot: "E", target_tag: "emotion", focus: null },
    });
    expect(affordance(emotion)).toEqual({ kind: "emotions" });

    const open = makeSession({
      phase: "elaboration",
      pending_question: { text: "?", kind: "open", target_slot: "B", target_tag: "action", focus: null },
    });
    expect(affordance(open)).toEqual({ kind: "text" });
    expect(affordance(makeSession({ phase: "elaboration" }))).toEqual({ kind: "text" });
  });

  it("walks revision from check buttons to text to yes/no", () => {
    const fresh = affordance(makeSession({ phase: "revision" }));
    expect(fresh.kind).toBe("buttons");
    if (fresh.kind === "buttons") {
      expect(fresh.buttons.map((b) => b.choice)).toEqual(["all_correct", "something_to_fix"]);
    }

    expect(affordance(makeSession({ phase: "revision", pending_fix: true }))).toEqual({
      kind: "text",
    });

    // After the adolescent has described a change, the confirm round is yes/no.
    const rechecking = makeSession({
      phase: "revision",
      turns: [
        turn("adolescent", "revision", "button", "There's something to fix"),
        turn("adolescent", "revision", "typed", "make it two panels"),
        turn("system", "revision", "typed", "Is it right now?"),
      ],
    });
    const a = affordance(rechecking);
    expect(a.kind).toBe("buttons");
    if (a.kind === "buttons") {
      expect(a.buttons.map((b) => b.choice)).toEqual(["yes", "no"]);
    }

    // A button press alone is not a change request.
    const buttonOnly = makeSession({
      phase: "revision",
      turns: [turn("adolescent", "revision", "button", "There's something to fix")],
    });
    const b = affordance(buttonOnly);
    expect(b.kind).toBe("buttons");
    if (b.kind === "buttons") {
      expect(b.buttons.map((spec) => spec.choice)).toEqual(["all_correct", "something_to_fix"]);
    }
  });

  it("shows exactly three titles during wrapup and gates Next on a pick", () => {
    const candidates = ["The prank", "Oliver and me", "A hard day"];
    const unpicked = affordance(makeSession({ phase: "wrapup", title_candidates: candidates }));
    expect(unpicked.kind).toBe("titles");
    if (unpicked.kind === "titles") {
      expect(unpicked.titles).toEqual(candidates);
      expect(unpicked.titles.length).toBe(3);
      expect(unpicked.picked).toBeNull();
      expect(unpicked.next).toBeNull();
    }

    const picked = affordance(
      makeSession({ phase: "wrapup", title_candidates: candidates, pending_title_index: 1 }),
    );
    if (picked.kind === "titles") {
      expect(picked.picked).toBe(1);
      expect(picked.next).toEqual({ label: "Next", choice: "next" });
    } else {
      expect.unreachable("wrapup must offer titles");
    }
  });

  it("offers nothing once finalized", () => {
    expect(affordance(makeSession({ phase: "finalized" }))).toEqual({ kind: "none" });
  });
});
