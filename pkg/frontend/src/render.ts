/** DOM rendering: one section per session, one card per stage event. */

import { SessionView, StageCard } from "./sessions.js";
import { CalendarEvent } from "./types.js";

export interface PendingActions {
  onConfirm(pendingId: string, card: HTMLElement): void;
  onCancel(pendingId: string, card: HTMLElement): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function asText(value: unknown): string {
  return typeof value === "string" ? value : JSON.stringify(value);
}

function cardBody(card: StageCard, view: SessionView, actions: PendingActions): HTMLElement {
  const body = el("div", "card-body");
  const payload = card.payload;
  switch (card.stage) {
    case "received": {
      if (typeof payload.text === "string") {
        body.appendChild(el("p", "transcript", payload.text || "(empty utterance)"));
      } else {
        body.appendChild(el("p", "note", `audio received (${asText(payload.audio_bytes)} bytes)`));
      }
      break;
    }
    case "transcribed":
    case "triggered": {
      body.appendChild(el("p", "transcript", asText(payload.text)));
      if (card.stage === "triggered") {
        body.appendChild(el("p", "note", `keyword: ${asText(payload.keyword)}`));
      } else {
        body.appendChild(el("p", "note", `source: ${asText(payload.source)}`));
      }
      break;
    }
    case "extracted": {
      body.appendChild(el("p", "note", `provenance: ${asText(payload.provenance)}`));
      const pre = el("pre", "intent-json");
      pre.dataset.raw = card.rawPayload;
      pre.dataset.view = "pretty";
      pre.textContent = JSON.stringify(payload, null, 2);
      const toggle = el("button", "toggle-json", "raw");
      toggle.type = "button";
      toggle.addEventListener("click", () => {
        if (pre.dataset.view === "pretty") {
          pre.dataset.view = "raw";
          pre.textContent = pre.dataset.raw ?? "";
          toggle.textContent = "pretty";
        } else {
          pre.dataset.view = "pretty";
          pre.textContent = JSON.stringify(payload, null, 2);
          toggle.textContent = "raw";
        }
      });
      body.appendChild(toggle);
      body.appendChild(pre);
      break;
    }
    case "resolved": {
      body.appendChild(el("p", "event-title", asText(payload.title)));
      body.appendChild(el("p", "window", `${asText(payload.start)} → ${asText(payload.end)}`));
      const conflicts = Array.isArray(payload.conflicts) ? payload.conflicts : [];
      if (conflicts.length > 0) {
        const warning = el("ul", "conflicts");
        for (const conflict of conflicts as Array<Record<string, unknown>>) {
          warning.appendChild(
            el("li", undefined, `conflicts with ${asText(conflict.title)} (${asText(conflict.start)})`),
          );
        }
        body.appendChild(el("p", "warning", `${conflicts.length} conflict(s)`));
        body.appendChild(warning);
      }
      break;
    }
    case "pending_confirmation": {
      body.appendChild(el("p", "event-title", asText(payload.title)));
      body.appendChild(el("p", "note", `expires ${asText(payload.expires_at)}`));
      if (!view.terminal) {
        const pendingId = asText(payload.pending_id);
        const confirm = el("button", "confirm", "Confirm");
        confirm.type = "button";
        const cancel = el("button", "cancel", "Cancel");
        cancel.type = "button";
        const host = body.closest("article") ?? body;
        confirm.addEventListener("click", () => actions.onConfirm(pendingId, host as HTMLElement));
        cancel.addEventListener("click", () => actions.onCancel(pendingId, host as HTMLElement));
        const row = el("div", "actions");
        row.appendChild(confirm);
        row.appendChild(cancel);
        body.appendChild(row);
      }
      break;
    }
    case "created": {
      body.appendChild(el("p", "note", `record ${asText(payload.record_id)}`));
      const sync = payload.external_sync as Record<string, unknown> | undefined;
      body.appendChild(el("p", "note", `sync: ${asText(sync?.status ?? "unknown")}`));
      break;
    }
    case "failed": {
      const error = payload.error as Record<string, unknown> | undefined;
      body.appendChild(
        el("p", "error-text", `${asText(error?.stage ?? "pipeline")}: ${asText(error?.message ?? "failed")}`),
      );
      break;
    }
    default: {
      // ignored / cancelled
      if (payload.reason !== undefined) {
        body.appendChild(el("p", "note", asText(payload.reason)));
      }
    }
  }
  return body;
}

function renderCard(card: StageCard, view: SessionView, actions: PendingActions): HTMLElement {
  const article = el("article", `card card-${card.stage}`);
  article.dataset.stage = card.stage;
  article.dataset.seq = String(card.seq);
  article.appendChild(el("h3", "card-stage", card.stage));
  article.appendChild(cardBody(card, view, actions));
  return article;
}

export function renderSession(view: SessionView, actions: PendingActions): HTMLElement {
  const section = el("section", "session");
  section.dataset.sessionId = view.sessionId;
  const header = el("header", "session-header");
  header.appendChild(el("span", "session-id", view.sessionId.slice(0, 8)));
  const badge = el("span", `badge badge-${view.status}`, view.status);
  header.appendChild(badge);
  section.appendChild(header);
  const list = el("div", "cards");
  for (const card of view.cards) {
    list.appendChild(renderCard(card, view, actions));
  }
  section.appendChild(list);
  return section;
}

export function showCardError(card: HTMLElement, message: string): void {
  let slot = card.querySelector<HTMLElement>(".card-error");
  if (!slot) {
    slot = el("p", "card-error");
    card.appendChild(slot);
  }
  slot.textContent = message;
}

function dayOf(iso: string): string {
  return iso.slice(0, 10);
}

function timeOf(iso: string): string {
  return iso.slice(11, 16);
}

export function renderCalendarPanel(events: CalendarEvent[]): HTMLElement {
  const panel = el("div", "calendar-days");
  if (events.length === 0) {
    panel.appendChild(el("p", "placeholder", "no events"));
    return panel;
  }
  const byDay = new Map<string, CalendarEvent[]>();
  for (const event of events) {
    const day = dayOf(event.start);
    if (!byDay.has(day)) byDay.set(day, []);
    byDay.get(day)!.push(event);
  }
  for (const [day, dayEvents] of byDay) {
    const section = el("section", "calendar-day");
    section.appendChild(el("h3", undefined, day));
    const list = el("ul", "calendar-events");
    for (const event of dayEvents) {
      const line = `${timeOf(event.start)}–${timeOf(event.end)} ${event.title}` +
        (event.attendee ? ` · ${event.attendee}` : "");
      const item = el("li", "calendar-event", line);
      item.dataset.eventId = event.id;
      list.appendChild(item);
    }
    section.appendChild(list);
    panel.appendChild(section);
  }
  return panel;
}
