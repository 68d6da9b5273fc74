/* Wire types for the journal service. These mirror the server's JSON
 * contract one to one; the client never invents fields of its own. */

export type Slot = "A" | "B" | "C" | "E";

export const SLOT_ORDER: readonly Slot[] = ["A", "B", "C", "E"];

export type Phase =
  | "preparation"
  | "articulation"
  | "verification"
  | "elaboration"
  | "revision"
  | "wrapup"
  | "finalized";

export type Role = "adolescent" | "system";

export type Modality = "speech_transcript" | "typed" | "button";

export type ElementKind = "actor" | "object" | "concept";

export interface SceneElement {
  id: string;
  kind: ElementKind;
  label: string;
  action: string | null;
  dialogue_line: string | null;
  thought: string | null;
  emotion: string | null;
}

/** [row, col] on the 5x5 panel grid. */
export type Cell = [number, number];

export interface SceneDocument {
  slot: Slot;
  setting: string | null;
  elements: SceneElement[];
  adjacencies: [string, string][];
  placements: Record<string, Cell>;
  unsatisfied: [string, string][];
}

export interface Turn {
  role: Role;
  text: string;
  phase: Phase;
  modality: Modality;
  timestamp: string;
  payload: Record<string, unknown> | null;
}

export interface PendingQuestion {
  text: string;
  kind: "open" | "options_in_text" | "emotion";
  target_slot: Slot | null;
  target_tag: string | null;
  focus: string | null;
}

export interface PanelDescription {
  slot: Slot;
  sentences: string[];
  complete: boolean;
}

export interface PlaceEntry {
  id: string;
  profile_id: string;
  label: string;
  category: string;
}

export interface PersonEntry {
  id: string;
  profile_id: string;
  label: string;
  category: string;
}

/** Subset of the session document the client reads; extra server fields
 * pass through untouched. */
export interface SessionView {
  id: string;
  profile_id: string;
  peer_id: string;
  phase: Phase;
  prompt_type: string | null;
  turns: Turn[];
  panels: Record<Slot, PanelDescription>;
  scenes: Record<Slot, SceneDocument>;
  title_candidates: string[];
  title: string | null;
  stamps_awarded: number;
  pending_question: PendingQuestion | null;
  pending_fix: boolean;
  pending_title_index: number | null;
}

// -- system actions (discriminated on "kind") --------------------------------

export interface SayAction {
  kind: "say";
  text: string;
  tts_request: { voice_id: string; text: string } | null;
}

export interface ShowEmotionButtonsAction {
  kind: "show_emotion_buttons";
  emotions: string[];
}

export interface ShowOutlineAction {
  kind: "show_outline";
  lines: string[];
}

export interface ShowStripAction {
  kind: "show_strip";
  scenes: Record<Slot, SceneDocument>;
}

export interface ShowTitlesAction {
  kind: "show_titles";
  titles: string[];
}

export interface AwardStampsAction {
  kind: "award_stamps";
  count: number;
}

export interface ErrorNoticeAction {
  kind: "error_notice";
  text: string;
  retryable: boolean;
}

export type SystemAction =
  | SayAction
  | ShowEmotionButtonsAction
  | ShowOutlineAction
  | ShowStripAction
  | ShowTitlesAction
  | AwardStampsAction
  | ErrorNoticeAction;

// -- user inputs --------------------------------------------------------------

export interface SelectionInput {
  kind: "selection";
  prompt_type: "place_people_selection" | "open_ended" | "schedule_based";
  place_id?: string | null;
  people_ids?: string[];
}

export interface UtteranceInput {
  kind: "utterance";
  text: string;
  modality?: "speech_transcript" | "typed";
}

export interface EmotionChoiceInput {
  kind: "emotion_choice";
  emotions: string[];
}

export type ButtonChoice =
  | "all_correct"
  | "something_to_fix"
  | "yes"
  | "no"
  | "title_index"
  | "next";

export interface ButtonInput {
  kind: "button";
  choice: ButtonChoice;
  index?: number | null;
}

export type UserInput =
  | SelectionInput
  | UtteranceInput
  | EmotionChoiceInput
  | ButtonInput;

// -- endpoint payloads ---------------------------------------------------------

export interface SessionPayload {
  session: SessionView;
  actions: SystemAction[];
}

export interface StripPayload {
  scenes: Record<Slot, SceneDocument>;
  svg: Record<Slot, string>;
}
