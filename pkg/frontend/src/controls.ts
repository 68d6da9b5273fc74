/* Phase-aware input affordances.
 *
 * The server enforces what it will accept; this table mirrors that
 * contract so the screen only ever offers inputs the current phase can
 * take. Exactly one affordance is active at a time: free text and mic are
 * disabled whenever a button choice is pending.
 */

import type { ButtonChoice, SessionView } from "./types.js";

export interface ButtonSpec {
  label: string;
  choice: ButtonChoice;
  index?: number;
}

export type Affordance =
  | { kind: "selection" }
  | { kind: "text" }
  | { kind: "emotions" }
  | { kind: "buttons"; buttons: ButtonSpec[] }
  | { kind: "titles"; titles: string[]; picked: number | null; next: ButtonSpec | null }
  | { kind: "none" };

const ALL_CORRECT: ButtonSpec = { label: "All correct", choice: "all_correct" };
const SOMETHING_TO_FIX: ButtonSpec = {
  label: "There's something to fix",
  choice: "something_to_fix",
};
const YES: ButtonSpec = { label: "Yes", choice: "yes" };
const NO: ButtonSpec = { label: "No", choice: "no" };

/** True once the adolescent has sent a change request during revision;
 * the confirm question is then phrased yes/no. */
function revisionRechecking(session: SessionView): boolean {
  return session.turns.some(
    (turn) =>
      turn.phase === "revision" &&
      turn.role === "adolescent" &&
      turn.modality !== "button",
  );
}

export function affordance(session: SessionView): Affordance {
  switch (session.phase) {
    case "preparation":
      return { kind: "selection" };
    case "articulation":
      return { kind: "text" };
    case "verification":
      if (session.pending_fix) return { kind: "text" };
      return { kind: "buttons", buttons: [ALL_CORRECT, SOMETHING_TO_FIX] };
    case "elaboration":
      if (session.pending_question?.kind === "emotion") return { kind: "emotions" };
      return { kind: "text" };
    case "revision":
      if (session.pending_fix) return { kind: "text" };
      if (revisionRechecking(session)) {
        return { kind: "buttons", buttons: [YES, NO] };
      }
      return { kind: "buttons", buttons: [ALL_CORRECT, SOMETHING_TO_FIX] };
    case "wrapup":
      return {
        kind: "titles",
        titles: session.title_candidates,
        picked: session.pending_title_index,
        next:
          session.pending_title_index === null
            ? null
            : { label: "Next", choice: "next" },
      };
    case "finalized":
      return { kind: "none" };
  }
}
