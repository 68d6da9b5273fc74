/* Browser wiring: binds the view state to the DOM and the API client.
 * All conversation logic lives server-side; this file only draws state
 * and forwards taps. */

import { ApiClient, ApiError } from "./api.js";
import { affordance } from "./controls.js";
import { createGrid, renderGrid, toInput, toggle, type EmotionGrid } from "./emotions.js";
import { renderStrip } from "./strip.js";
import type { PersonEntry, PlaceEntry, SessionView, Slot, UserInput } from "./types.js";
import { applyExchange, buildView, foldAction, type ViewState } from "./view.js";

interface Elements {
  chat: HTMLElement;
  strip: HTMLElement;
  controls: HTMLElement;
  status: HTMLElement;
}

interface SelectionDraft {
  places: PlaceEntry[];
  people: PersonEntry[];
  placeId: string | null;
  peopleIds: Set<string>;
}

// Dictation rides on the browser's built-in speech capability when one
// exists; typing is always available as the fallback.
interface SpeechRecognitionLike {
  lang: string;
  interimResults: boolean;
  maxAlternatives: number;
  onresult: ((event: { results: ArrayLike<ArrayLike<{ transcript: string }>> }) => void) | null;
  onerror: (() => void) | null;
  start(): void;
}

type SpeechRecognitionCtor = new () => SpeechRecognitionLike;

function speechRecognitionCtor(): SpeechRecognitionCtor | null {
  const w = window as unknown as Record<string, unknown>;
  const ctor = w["SpeechRecognition"] ?? w["webkitSpeechRecognition"];
  return typeof ctor === "function" ? (ctor as SpeechRecognitionCtor) : null;
}

function query(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

function escapeHtml(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function button(label: string, className: string, onTap: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.type = "button";
  node.className = className;
  node.textContent = label;
  node.addEventListener("click", onTap);
  return node;
}

export class App {
  private view: ViewState | null = null;
  private grid: EmotionGrid | null = null;
  private selection: SelectionDraft | null = null;
  private profileId = "";
  private sending = false;
  /** The adolescent's own words, shown immediately while the exchange is
   * in flight; the server's turn log replaces it on landing. */
  private pendingEcho: string | null = null;
  private readonly els: Elements;

  constructor(private readonly api: ApiClient) {
    this.els = {
      chat: query("chat"),
      strip: query("strip"),
      controls: query("controls"),
      status: query("status"),
    };
  }

  /** Start fresh or reattach to a session id stored by a previous page
   * load; the rebuilt view is identical either way. */
  async start(profileId: string, peerId: string): Promise<void> {
    this.profileId = profileId;
    const stored = sessionStorage.getItem("session-id");
    if (stored !== null) {
      try {
        await this.resume(stored);
        return;
      } catch {
        sessionStorage.removeItem("session-id");
      }
    }
    const payload = await this.api.createSession(profileId, peerId);
    sessionStorage.setItem("session-id", payload.session.id);
    this.view = buildView(payload.session, payload.actions);
    this.render();
    void this.follow();
  }

  private async resume(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    this.profileId = session.profile_id;
    const actions: Parameters<typeof buildView>[1] = [];
    await this.api.streamEvents(sessionId, 0, (_index, action) => {
      actions.push(action);
    });
    this.view = buildView(session, actions);
    this.render();
    void this.follow();
  }

  /** Keep one event-channel consumer open so actions pushed by the server
   * appear without another input round-trip. POST responses fold ahead of
   * the stream, so only genuinely new indexes are applied. */
  private async follow(): Promise<void> {
    if (this.view === null || this.view.session.phase === "finalized") return;
    const id = this.view.session.id;
    try {
      await this.api.streamEvents(id, this.view.cursor, (index, action) => {
        if (this.view !== null && index === this.view.cursor) {
          this.view = foldAction(this.view, action);
          this.render();
        }
      });
    } catch {
      // stream drop: the next input round-trip still carries full state
    }
  }

  private async submit(input: UserInput): Promise<void> {
    if (this.view === null || this.sending) return;
    this.sending = true;
    if (input.kind === "utterance") {
      this.pendingEcho = input.text;
    } else if (input.kind === "emotion_choice") {
      this.pendingEcho = input.emotions.join(", ");
    }
    this.els.status.textContent = "…";
    this.renderChat(this.view.session);
    try {
      const payload = await this.api.postInput(this.view.session.id, input);
      this.view = applyExchange(this.view, payload);
      this.grid = null;
      this.els.status.textContent = "";
    } catch (error) {
      if (error instanceof ApiError && error.retryable) {
        this.els.status.textContent = "That didn't go through. Please try again!";
      } else {
        this.els.status.textContent = String(error);
      }
    } finally {
      this.sending = false;
      this.pendingEcho = null;
      this.render();
    }
  }

  private render(): void {
    if (this.view === null) return;
    this.renderChat(this.view.session);
    this.renderStripPane();
    this.renderControls();
  }

  private renderChat(session: SessionView): void {
    const rows = session.turns.map((turn) => {
      const who = turn.role === "system" ? "peer" : "me";
      return `<div class="turn turn-${who}">${escapeHtml(turn.text)}</div>`;
    });
    if (this.pendingEcho !== null) {
      rows.push(`<div class="turn turn-me turn-pending">${escapeHtml(this.pendingEcho)}</div>`);
    }
    if (this.view?.notice) {
      rows.push(`<div class="turn turn-error">${escapeHtml(this.view.notice)}</div>`);
    }
    this.els.chat.innerHTML = rows.join("");
    this.els.chat.scrollTop = this.els.chat.scrollHeight;
  }

  private renderStripPane(): void {
    const view = this.view;
    if (view === null) return;
    const scenes = view.scenes ?? view.session.scenes;
    const captions: Partial<Record<Slot, string>> = {};
    for (const slot of ["A", "B", "C", "E"] as const) {
      const sentences = view.session.panels[slot]?.sentences ?? [];
      if (sentences.length > 0) captions[slot] = sentences.join(" ");
    }
    this.els.strip.innerHTML = renderStrip(scenes, captions);
    if (view.stamps > 0) {
      this.els.strip.innerHTML += `<div class="stamps">${"⭐".repeat(view.stamps)}</div>`;
    }
  }

  private renderControls(): void {
    const view = this.view;
    if (view === null) return;
    const pane = this.els.controls;
    const active = affordance(view.session);
    pane.innerHTML = "";

    if (active.kind === "text") {
      pane.innerHTML =
        `<form id="say"><input name="text" autocomplete="off" ` +
        `placeholder="${escapeHtml(view.session.pending_question?.text ?? "Tell me what happened")}">` +
        `<button type="submit">Send</button></form>`;
      const form = pane.querySelector("form") as HTMLFormElement;
      form.addEventListener("submit", (event) => {
        event.preventDefault();
        const box = form.elements.namedItem("text") as HTMLInputElement;
        const text = box.value.trim();
        if (text === "") return;
        void this.submit({ kind: "utterance", text, modality: "typed" });
      });
      const Recognition = speechRecognitionCtor();
      if (Recognition !== null) {
        const mic = button("🎤", "mic", () => this.dictate(Recognition));
        mic.setAttribute("aria-label", "Speak your answer");
        form.appendChild(mic);
      }
      return;
    }

    if (active.kind === "emotions") {
      if (this.grid === null) this.grid = createGrid(view.emotionCards);
      pane.innerHTML =
        renderGrid(this.grid) + `<button type="button" id="emotions-done">Done</button>`;
      pane.querySelectorAll(".emotion-card").forEach((card) => {
        card.addEventListener("click", () => {
          const label = (card as HTMLElement).dataset["emotion"] ?? "";
          this.grid = toggle(this.grid as EmotionGrid, label);
          this.renderControls();
        });
      });
      (pane.querySelector("#emotions-done") as HTMLElement).addEventListener("click", () => {
        const input = toInput(this.grid as EmotionGrid);
        if (input !== null) void this.submit(input);
      });
      return;
    }

    if (active.kind === "buttons") {
      for (const spec of active.buttons) {
        pane.appendChild(
          button(spec.label, "choice", () => {
            void this.submit({ kind: "button", choice: spec.choice });
          }),
        );
      }
      return;
    }

    if (active.kind === "titles") {
      active.titles.forEach((title, index) => {
        pane.appendChild(
          button(title, index === active.picked ? "title picked" : "title", () => {
            void this.submit({ kind: "button", choice: "title_index", index });
          }),
        );
      });
      if (active.next !== null) {
        const next = active.next;
        pane.appendChild(
          button(next.label, "choice", () => {
            void this.submit({ kind: "button", choice: next.choice });
          }),
        );
      }
      return;
    }

    if (active.kind === "selection") {
      this.renderSelection(pane);
    }
  }

  /** Preparation screen: pick a place and the people who were there, or
   * skip straight to telling it freely. Choices come from the profile's
   * registry; the client adds none of its own. */
  private renderSelection(pane: HTMLElement): void {
    const draft = this.selection;
    if (draft === null) {
      pane.innerHTML = `<p class="hint">One moment…</p>`;
      void this.loadSelection();
      return;
    }

    const addHint = (text: string) => {
      const hint = document.createElement("p");
      hint.className = "hint";
      hint.textContent = text;
      pane.appendChild(hint);
    };
    const addRow = (): HTMLElement => {
      const row = document.createElement("div");
      row.className = "pick-row";
      pane.appendChild(row);
      return row;
    };

    if (draft.places.length > 0) {
      addHint("Where were you today?");
      const placeRow = addRow();
      for (const place of draft.places) {
        placeRow.appendChild(
          button(place.label, draft.placeId === place.id ? "pick picked" : "pick", () => {
            draft.placeId = draft.placeId === place.id ? null : place.id;
            this.renderControls();
          }),
        );
      }
    }
    if (draft.people.length > 0) {
      addHint("Who was with you?");
      const peopleRow = addRow();
      for (const person of draft.people) {
        peopleRow.appendChild(
          button(person.label, draft.peopleIds.has(person.id) ? "pick picked" : "pick", () => {
            if (draft.peopleIds.has(person.id)) {
              draft.peopleIds.delete(person.id);
            } else {
              draft.peopleIds.add(person.id);
            }
            this.renderControls();
          }),
        );
      }
    }

    const actions = addRow();
    if (draft.places.length > 0) {
      const start = button("Start with this", "choice", () => {
        if (draft.placeId === null) return;
        void this.submit({
          kind: "selection",
          prompt_type: "place_people_selection",
          place_id: draft.placeId,
          people_ids: [...draft.peopleIds],
        });
      });
      start.disabled = draft.placeId === null;
      actions.appendChild(start);
    }
    actions.appendChild(
      button("I'll tell it my own way", "choice", () => {
        void this.submit({ kind: "selection", prompt_type: "open_ended" });
      }),
    );
  }

  private async loadSelection(): Promise<void> {
    try {
      const [places, people] = await Promise.all([
        this.api.listPlaces(this.profileId),
        this.api.listPeople(this.profileId),
      ]);
      this.selection = { places, people, placeId: null, peopleIds: new Set() };
    } catch {
      // registry unavailable: the open-ended path still works
      this.selection = { places: [], people: [], placeId: null, peopleIds: new Set() };
    }
    this.renderControls();
  }

  private dictate(Recognition: SpeechRecognitionCtor): void {
    const recognition = new Recognition();
    recognition.lang = "en";
    recognition.interimResults = false;
    recognition.maxAlternatives = 1;
    this.els.status.textContent = "Listening…";
    recognition.onresult = (event) => {
      const transcript = event.results[0]?.[0]?.transcript.trim() ?? "";
      this.els.status.textContent = "";
      if (transcript !== "") {
        void this.submit({ kind: "utterance", text: transcript, modality: "speech_transcript" });
      }
    };
    recognition.onerror = () => {
      this.els.status.textContent = "Couldn't hear that. Typing works too!";
    };
    recognition.start();
  }
}

export function boot(): void {
  const params = new URLSearchParams(location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const app = new App(api);
  void app.start(params.get("profile") ?? "adol-demo", params.get("peer") ?? "peer-demo");
}
