/** Thin client over the gateway's HTTP endpoints. */

import { CalendarEvent, StageEvent } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function checked(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body?.detail) detail = `${detail}: ${body.detail}`;
    } catch {
      // keep the bare status
    }
    throw new Error(detail);
  }
  return response;
}

export class GatewayClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async submitUtterance(text: string): Promise<string> {
    const response = await checked(
      await this.fetchFn(`${this.baseUrl}/api/utterance`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      }),
    );
    return ((await response.json()) as { session_id: string }).session_id;
  }

  async submitAudio(audio: ArrayBuffer | Blob): Promise<string> {
    const response = await checked(
      await this.fetchFn(`${this.baseUrl}/api/audio`, {
        method: "POST",
        headers: { "Content-Type": "audio/wav" },
        body: audio,
      }),
    );
    return ((await response.json()) as { session_id: string }).session_id;
  }

  async confirm(pendingId: string): Promise<StageEvent> {
    const response = await checked(
      await this.fetchFn(`${this.baseUrl}/api/pending/${pendingId}/confirm`, { method: "POST" }),
    );
    return (await response.json()) as StageEvent;
  }

  async cancel(pendingId: string): Promise<StageEvent> {
    const response = await checked(
      await this.fetchFn(`${this.baseUrl}/api/pending/${pendingId}/cancel`, { method: "POST" }),
    );
    return (await response.json()) as StageEvent;
  }

  async calendar(startIso: string, endIso: string): Promise<CalendarEvent[]> {
    const params = new URLSearchParams({ start: startIso, end: endIso });
    const response = await checked(
      await this.fetchFn(`${this.baseUrl}/api/calendar?${params.toString()}`),
    );
    return ((await response.json()) as { events: CalendarEvent[] }).events;
  }
}
