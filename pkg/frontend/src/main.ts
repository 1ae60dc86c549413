/** Dashboard wiring: stream -> session store -> DOM, plus operator actions. */

import { GatewayClient } from "./api.js";
import { renderCalendarPanel, renderSession, showCardError } from "./render.js";
import { SessionStore, SessionView } from "./sessions.js";
import { StageEventStream } from "./stream.js";

const CALENDAR_LOOKBACK_DAYS = 1;
const CALENDAR_LOOKAHEAD_DAYS = 14;

function isoDaysFromNow(days: number): string {
  return new Date(Date.now() + days * 86_400_000).toISOString();
}

export function boot(root: Document = document): void {
  const sessionsRoot = root.getElementById("sessions")!;
  const calendarRoot = root.getElementById("calendar")!;
  const banner = root.getElementById("banner")!;
  const form = root.getElementById("utterance-form") as HTMLFormElement;
  const textInput = root.getElementById("utterance-text") as HTMLInputElement;
  const audioInput = root.getElementById("audio-file") as HTMLInputElement;
  const formError = root.getElementById("form-error")!;

  const client = new GatewayClient();
  const store = new SessionStore();

  const actions = {
    onConfirm(pendingId: string, card: HTMLElement) {
      client.confirm(pendingId).catch((error: Error) => showCardError(card, error.message));
    },
    onCancel(pendingId: string, card: HTMLElement) {
      client.cancel(pendingId).catch((error: Error) => showCardError(card, error.message));
    },
  };

  function updateSession(view: SessionView): void {
    const fresh = renderSession(view, actions);
    const existing = sessionsRoot.querySelector(`[data-session-id="${view.sessionId}"]`);
    if (existing) {
      existing.replaceWith(fresh);
    } else {
      sessionsRoot.prepend(fresh);
    }
  }

  function refreshCalendar(): void {
    client
      .calendar(isoDaysFromNow(-CALENDAR_LOOKBACK_DAYS), isoDaysFromNow(CALENDAR_LOOKAHEAD_DAYS))
      .then((events) => {
        calendarRoot.replaceChildren(renderCalendarPanel(events));
      })
      .catch((error: Error) => {
        calendarRoot.replaceChildren();
        const failure = root.createElement("p");
        failure.className = "error-text";
        failure.textContent = `calendar unavailable: ${error.message}`;
        calendarRoot.appendChild(failure);
      });
  }

  const stream = new StageEventStream("/api/stream", {
    onEvent(data) {
      const view = store.ingest(data);
      if (!view) return;
      updateSession(view);
      if (view.status === "created") refreshCalendar();
    },
    onStatus(connected) {
      banner.toggleAttribute("hidden", connected);
    },
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = textInput.value.trim();
    if (!text) return;
    formError.textContent = "";
    client
      .submitUtterance(text)
      .then(() => {
        textInput.value = "";
      })
      .catch((error: Error) => {
        formError.textContent = error.message;
      });
  });

  audioInput.addEventListener("change", () => {
    const file = audioInput.files?.[0];
    if (!file) return;
    formError.textContent = "";
    client.submitAudio(file).catch((error: Error) => {
      formError.textContent = error.message;
    });
    audioInput.value = "";
  });

  stream.connect();
  refreshCalendar();
}

if (typeof document !== "undefined" && document.getElementById("sessions")) {
  boot();
}
