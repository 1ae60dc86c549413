/** Session state reduced from the stage-event stream.
 *
 * Cards always render in seq order: out-of-order events are buffered until
 * the gap fills. A terminal stage closes the session view; later events for
 * that session are dropped.
 */

import { extractRawPayload } from "./payload.js";
import { StageEvent, TERMINAL_STAGES } from "./types.js";

export interface StageCard {
  seq: number;
  stage: string;
  payload: Record<string, unknown>;
  /** The payload exactly as emitted by the gateway (no client-side mutation). */
  rawPayload: string;
  at: string;
}

export interface SessionView {
  sessionId: string;
  cards: StageCard[];
  status: string;
  terminal: boolean;
  buffered: Map<number, StageCard>;
  nextSeq: number;
}

export class SessionStore {
  readonly sessions = new Map<string, SessionView>();

  private viewFor(sessionId: string): SessionView {
    let view = this.sessions.get(sessionId);
    if (!view) {
      view = {
        sessionId,
        cards: [],
        status: "waiting",
        terminal: false,
        buffered: new Map(),
        nextSeq: 1,
      };
      this.sessions.set(sessionId, view);
    }
    return view;
  }

  /** Feed one raw SSE data line; returns the affected view, or null if unparseable. */
  ingest(rawLine: string): SessionView | null {
    let event: StageEvent;
    try {
      event = JSON.parse(rawLine) as StageEvent;
    } catch {
      return null;
    }
    if (typeof event?.session_id !== "string" || typeof event?.seq !== "number") {
      return null;
    }
    const view = this.viewFor(event.session_id);
    if (view.terminal || event.seq < view.nextSeq) {
      return view; // closed session or duplicate delivery
    }
    view.buffered.set(event.seq, {
      seq: event.seq,
      stage: event.stage,
      payload: (event.payload ?? {}) as Record<string, unknown>,
      rawPayload: extractRawPayload(rawLine) ?? "null",
      at: event.at,
    });
    while (view.buffered.has(view.nextSeq)) {
      const card = view.buffered.get(view.nextSeq)!;
      view.buffered.delete(view.nextSeq);
      view.cards.push(card);
      view.status = card.stage;
      view.nextSeq++;
      if (TERMINAL_STAGES.has(card.stage)) {
        view.terminal = true;
        view.buffered.clear();
        break;
      }
    }
    return view;
  }
}
