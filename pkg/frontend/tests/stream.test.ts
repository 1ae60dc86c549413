import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { BASE_RETRY_MS, EventSourceLike, StageEventStream } from "../src/stream.js";

class FakeEventSource implements EventSourceLike {
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: MessageEvent) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  closed = false;

  constructor(readonly url: string) {}

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.({});
  }

  emit(data: string): void {
    this.onmessage?.({ data } as MessageEvent);
  }

  fail(): void {
    this.onerror?.({});
  }
}

describe("StageEventStream", () => {
  const sources: FakeEventSource[] = [];
  const events: string[] = [];
  const statuses: boolean[] = [];
  let stream: StageEventStream;

  beforeEach(() => {
    vi.useFakeTimers();
    sources.length = 0;
    events.length = 0;
    statuses.length = 0;
    stream = new StageEventStream(
      "/api/stream",
      {
        onEvent: (data) => events.push(data),
        onStatus: (connected) => statuses.push(connected),
      },
      (url) => {
        const source = new FakeEventSource(url);
        sources.push(source);
        return source;
      },
    );
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers messages after connecting", () => {
    stream.connect();
    sources[0].open();
    sources[0].emit('{"seq": 1}');
    expect(statuses).toEqual([true]);
    expect(events).toEqual(['{"seq": 1}']);
  });

  it("reconnects with exponential backoff after drops", () => {
    stream.connect();
    sources[0].open();
    sources[0].fail();
    expect(statuses).toEqual([true, false]);
    expect(sources).toHaveLength(1);

    vi.advanceTimersByTime(BASE_RETRY_MS);
    expect(sources).toHaveLength(2);

    sources[1].fail();
    vi.advanceTimersByTime(BASE_RETRY_MS);  // second retry waits 2x base
    expect(sources).toHaveLength(2);
    vi.advanceTimersByTime(BASE_RETRY_MS);
    expect(sources).toHaveLength(3);
  });

  it("resets the backoff after a successful open", () => {
    stream.connect();
    sources[0].fail();
    vi.advanceTimersByTime(BASE_RETRY_MS);
    sources[1].open();
    sources[1].fail();
    vi.advanceTimersByTime(BASE_RETRY_MS);  // back to base delay
    expect(sources).toHaveLength(3);
  });

  it("close stops reconnect attempts", () => {
    stream.connect();
    sources[0].fail();
    stream.close();
    vi.advanceTimersByTime(BASE_RETRY_MS * 10);
    expect(sources).toHaveLength(1);
    expect(sources[0].closed).toBe(true);
  });
});
