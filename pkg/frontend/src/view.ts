/* Client view state.
 *
 * Everything on screen originates from the server: the chat transcript is
 * the session's turn log verbatim, and the ephemeral surfaces (outline,
 * strip, emotion cards, titles, stamps) are a left fold over the system
 * action stream. Because the state is a pure function of
 * (session snapshot, folded actions), a page refresh that refetches the
 * session and replays the event backlog lands on the identical view.
 */

import type {
  SceneDocument,
  SessionPayload,
  SessionView,
  Slot,
  SystemAction,
} from "./types.js";

export interface ViewState {
  session: SessionView;
  /** Last shown outline, null before verification. */
  outline: string[] | null;
  /** Scenes from the most recent show_strip, null before the first one. */
  scenes: Record<Slot, SceneDocument> | null;
  /** Cards offered by the most recent show_emotion_buttons. */
  emotionCards: string[];
  /** Candidates from the most recent show_titles. */
  titles: string[];
  stamps: number;
  /** Last error notice, cleared by the next successful exchange. */
  notice: string | null;
  /** Count of actions folded in; doubles as the event resume cursor. */
  cursor: number;
}

export function foldAction(state: ViewState, action: SystemAction): ViewState {
  const next: ViewState = { ...state, cursor: state.cursor + 1, notice: null };
  switch (action.kind) {
    case "say":
      break; // the transcript comes from session.turns
    case "show_outline":
      next.outline = action.lines;
      break;
    case "show_strip":
      next.scenes = action.scenes;
      break;
    case "show_emotion_buttons":
      next.emotionCards = action.emotions;
      break;
    case "show_titles":
      next.titles = action.titles;
      break;
    case "award_stamps":
      next.stamps = state.stamps + action.count;
      break;
    case "error_notice":
      next.notice = action.text;
      break;
  }
  return next;
}

/** State after one server exchange: swap in the fresh session snapshot,
 * fold the newly emitted actions. */
export function applyExchange(state: ViewState, payload: SessionPayload): ViewState {
  let next: ViewState = { ...state, session: payload.session };
  for (const action of payload.actions) {
    next = foldAction(next, action);
  }
  return next;
}

/** Rebuild the view from scratch, as a page refresh does: current session
 * plus the full action backlog from cursor zero. */
export function buildView(session: SessionView, backlog: SystemAction[]): ViewState {
  let state: ViewState = {
    session,
    outline: null,
    scenes: null,
    emotionCards: [],
    titles: [],
    stamps: 0,
    notice: null,
    cursor: 0,
  };
  for (const action of backlog) {
    state = foldAction(state, action);
  }
  return state;
}
