/* Incremental parser for the session event channel.
 *
 * The server frames every system action as
 *
 *   id: <index + 1>
 *   event: action
 *   data: <canonical JSON>
 *
 * and closes finalized streams with an `end` frame whose data carries the
 * total count. Frame ids double as resume cursors: reconnecting with
 * ?cursor=<last id> replays everything the client has not seen yet.
 */

export interface SseFrame {
  id: number | null;
  event: string;
  data: string;
}

export class SseParser {
  private buffer = "";

  /** Highest frame id seen so far; safe to use as a resume cursor. */
  lastId = 0;

  /** Feed one chunk; returns every frame completed by it. Frames split
   * across chunk boundaries are held until the terminator arrives. */
  push(chunk: string): SseFrame[] {
    // Normalize CRLF so the blank-line terminator is always "\n\n". A CR at
    // the very end may be half of a pair split across chunks, so hold it.
    let working = (this.buffer + chunk).replace(/\r\n/g, "\n");
    let held = "";
    if (working.endsWith("\r")) {
      held = "\r";
      working = working.slice(0, -1);
    }
    const frames: SseFrame[] = [];
    let boundary: number;
    while ((boundary = working.indexOf("\n\n")) !== -1) {
      const block = working.slice(0, boundary);
      working = working.slice(boundary + 2);
      const frame = this.parseBlock(block);
      if (frame !== null) {
        if (frame.id !== null) this.lastId = frame.id;
        frames.push(frame);
      }
    }
    this.buffer = working + held;
    return frames;
  }

  private parseBlock(block: string): SseFrame | null {
    let id: number | null = null;
    let event = "message";
    const data: string[] = [];
    for (const raw of block.split("\n")) {
      const line = raw.endsWith("\r") ? raw.slice(0, -1) : raw;
      if (line.startsWith("id:")) {
        const parsed = Number(line.slice(3).trim());
        if (Number.isFinite(parsed)) id = parsed;
      } else if (line.startsWith("event:")) {
        event = line.slice(6).trim();
      } else if (line.startsWith("data:")) {
        data.push(line.slice(5).trim());
      }
    }
    if (data.length === 0) return null;
    return { id, event, data: data.join("\n") };
  }
}

export function eventsUrl(base: string, sessionId: string, cursor: number): string {
  const root = base.replace(/\/$/, "");
  return `${root}/sessions/${encodeURIComponent(sessionId)}/events?cursor=${cursor}`;
}
