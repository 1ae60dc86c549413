/** SSE subscription with exponential-backoff reconnect. */

export const BASE_RETRY_MS = 1000;
export const MAX_RETRY_MS = 30000;

/* eslint-disable @typescript-eslint/no-explicit-any -- mirrors the DOM EventSource surface */
export interface EventSourceLike {
  onopen: ((ev: any) => any) | null;
  onmessage: ((ev: any) => any) | null;
  onerror: ((ev: any) => any) | null;
  close(): void;
}
/* eslint-enable @typescript-eslint/no-explicit-any */

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamHandlers {
  onEvent(data: string): void;
  onStatus(connected: boolean): void;
}

export class StageEventStream {
  private source: EventSourceLike | null = null;
  private attempt = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly factory: EventSourceFactory = (url) => new EventSource(url),
  ) {}

  connect(): void {
    if (this.closed) return;
    this.source?.close();
    this.source = this.factory(this.url);
    this.source.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus(true);
    };
    this.source.onmessage = (event) => {
      this.handlers.onEvent(event.data);
    };
    this.source.onerror = () => {
      this.handlers.onStatus(false);
      this.source?.close();
      this.source = null;
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.timer !== null) return;
    const delay = Math.min(BASE_RETRY_MS * 2 ** this.attempt, MAX_RETRY_MS);
    this.attempt++;
    this.timer = setTimeout(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.source?.close();
    this.source = null;
    this.handlers.onStatus(false);
  }
}
