/* Thin REST client. One method per endpoint, no retries beyond what the
 * server's idempotency keys make safe. */

import type {
  PersonEntry,
  PlaceEntry,
  SessionPayload,
  SessionView,
  StripPayload,
  SystemAction,
  UserInput,
} from "./types.js";
import { SseParser, eventsUrl } from "./sse.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly expected?: string[],
    readonly retryable?: boolean,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function readError(response: Response): Promise<ApiError> {
  let detail = response.statusText;
  let expected: string[] | undefined;
  let retryable: boolean | undefined;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
    if (Array.isArray(body.expected)) expected = body.expected;
    if (typeof body.retryable === "boolean") retryable = body.retryable;
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, detail, expected, retryable);
}

export class ApiClient {
  constructor(private readonly base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.url(path), {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) throw await readError(response);
    return (await response.json()) as T;
  }

  createSession(profileId: string, peerId: string): Promise<SessionPayload> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ profile_id: profileId, peer_id: peerId }),
    });
  }

  /** Submit one input. The generated idempotency key makes a blind retry
   * after a network hiccup safe: a duplicate delivery returns the cached
   * first result instead of advancing the session twice. */
  postInput(
    sessionId: string,
    input: UserInput,
    idempotencyKey?: string,
  ): Promise<SessionPayload> {
    const key = idempotencyKey ?? crypto.randomUUID();
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/input`, {
      method: "POST",
      body: JSON.stringify({ input, idempotency_key: key }),
    });
  }

  async getSession(sessionId: string): Promise<SessionView> {
    const payload = await this.request<{ session: SessionView }>(
      `/sessions/${encodeURIComponent(sessionId)}`,
    );
    return payload.session;
  }

  getStrip(sessionId: string): Promise<StripPayload> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/strip`);
  }

  async listPlaces(profileId: string): Promise<PlaceEntry[]> {
    const payload = await this.request<{ places: PlaceEntry[] }>(
      `/places?profile_id=${encodeURIComponent(profileId)}`,
    );
    return payload.places;
  }

  async listPeople(profileId: string): Promise<PersonEntry[]> {
    const payload = await this.request<{ people: PersonEntry[] }>(
      `/people?profile_id=${encodeURIComponent(profileId)}`,
    );
    return payload.people;
  }

  /** Consume the event channel from `cursor` until the stream closes.
   * Returns the next resume cursor. */
  async streamEvents(
    sessionId: string,
    cursor: number,
    onAction: (index: number, action: SystemAction) => void,
    signal?: AbortSignal,
  ): Promise<number> {
    const response = await fetch(eventsUrl(this.base, sessionId, cursor), { signal });
    if (!response.ok) throw await readError(response);
    if (!response.body) throw new ApiError(0, "event stream has no body");

    const reader = response.body.getReader();
    const decoder = new TextDecoder("utf-8");
    const parser = new SseParser();
    parser.lastId = cursor;
    for (;;) {
      const { value, done } = await reader.read();
      if (done) break;
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        if (frame.event === "action" && frame.id !== null) {
          onAction(frame.id - 1, JSON.parse(frame.data) as SystemAction);
        } else if (frame.event === "end") {
          return parser.lastId;
        }
      }
    }
    return parser.lastId;
  }
}
