/** Wire types shared with the gateway's HTTP/SSE API. */

export interface StageEvent {
  session_id: string;
  seq: number;
  stage: string;
  payload: Record<string, unknown>;
  at: string;
}

export const TERMINAL_STAGES = new Set(["ignored", "cancelled", "failed", "created"]);

export interface CalendarEvent {
  id: string;
  title: string;
  start: string;
  end: string;
  attendee: string | null;
  description: string | null;
  external_id: string | null;
  created_at: string;
}
