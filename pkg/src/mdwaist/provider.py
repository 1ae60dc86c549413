"""Best-effort replication of locally committed events to a calendar provider.

The provider speaks a Google-Calendar-style event-insert API: POST to
``{base_url}/calendars/{calendar_id}/events`` with bearer-token auth. Every
request carries an ``Idempotency-Key`` header equal to the local record id so
a retry after a timeout cannot create a duplicate event.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx

from .calendar_store import CalendarStore
from .model import EventRecord


class ProviderSyncError(RuntimeError):
    """Provider call failed; the local record keeps external_id absent."""


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    calendar_id: str
    auth_token: str
    timeout: float = 10.0

    def __post_init__(self):
        if not (self.base_url.startswith("http://") or self.base_url.startswith("https://")):
            raise ValueError(f"provider base_url must be absolute: {self.base_url!r}")


def event_body(record: EventRecord) -> dict:
    """Wire form of one event for the provider's insert endpoint."""
    intent = record.event.intent
    return {
        "summary": record.event.title,
        "description": intent.description or "",
        "start": {"dateTime": record.event.start.isoformat()},
        "end": {"dateTime": record.event.end.isoformat()},
        "attendees": [{"displayName": intent.attendee}] if intent.attendee else [],
    }


def sync_external(record: EventRecord, provider: ProviderConfig, store: CalendarStore) -> str:
    """Insert the event with the provider and persist its id on success."""
    if record.external_id is not None:
        raise ProviderSyncError(f"record {record.id} is already synced")
    url = f"{provider.base_url.rstrip('/')}/calendars/{provider.calendar_id}/events"
    headers = {
        "Authorization": f"Bearer {provider.auth_token}",
        "Idempotency-Key": record.id,
    }
    try:
        response = httpx.post(url, json=event_body(record), headers=headers, timeout=provider.timeout)
    except httpx.HTTPError as exc:
        raise ProviderSyncError(f"provider request failed: {exc}") from exc
    if response.status_code == 401:
        raise ProviderSyncError("provider authentication failed (HTTP 401)")
    if not 200 <= response.status_code < 300:
        raise ProviderSyncError(f"provider returned HTTP {response.status_code}")
    try:
        external_id = response.json()["id"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProviderSyncError(f"malformed provider response: {exc}") from exc
    if not isinstance(external_id, str) or not external_id:
        raise ProviderSyncError("malformed provider response: missing event id")
    store.set_external_id(record.id, external_id)
    return external_id
