"""JSON-file-backed calendar store with interval conflict detection.

The store file is the local source of truth so the pipeline works offline.
Writes are atomic (temp file then rename) and serialized behind a lock;
records are kept ordered by start instant, ties broken by id. Events occupy
half-open intervals [start, end): back-to-back appointments never conflict.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from .model import EventRecord, ResolvedEvent, as_utc

STORE_VERSION = 1


class StoreError(RuntimeError):
    """Store file is unreadable or an operation violated a store invariant."""


def _record_sort_key(record: EventRecord):
    return as_utc(record.event.start), record.id


class CalendarStore:
    """Persisted, ordered collection of event records."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        if self.path.exists():
            self._records = self._load()

    def _load(self) -> list[EventRecord]:
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StoreError(f"cannot read store file {self.path}: {exc}") from exc
        if not isinstance(data, dict) or data.get("version") != STORE_VERSION:
            raise StoreError(f"unsupported store file version in {self.path}")
        try:
            records = [EventRecord.from_dict(item) for item in data["events"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreError(f"malformed event in store file {self.path}: {exc}") from exc
        return sorted(records, key=_record_sort_key)

    def _persist(self, records: list[EventRecord]) -> None:
        """Write-then-rename; raises without touching in-memory state."""
        payload = {
            "version": STORE_VERSION,
            "events": [record.to_dict() for record in records],
        }
        fd, tmp_path = tempfile.mkstemp(
            prefix=self.path.name + ".", suffix=".tmp", dir=self.path.parent
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, ensure_ascii=False, indent=2)
                handle.write("\n")
            os.replace(tmp_path, self.path)
        except OSError as exc:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
            raise StoreError(f"cannot persist store file {self.path}: {exc}") from exc

    @property
    def records(self) -> tuple[EventRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def get(self, record_id: str) -> EventRecord:
        with self._lock:
            for record in self._records:
                if record.id == record_id:
                    return record
        raise StoreError(f"no record with id {record_id}")

    def create_event(self, event: ResolvedEvent) -> EventRecord:
        """Assign a fresh id, persist atomically, return the record."""
        record = EventRecord(
            id=uuid.uuid4().hex,
            event=event,
            created_at=datetime.now(timezone.utc),
        )
        with self._lock:
            updated = sorted(self._records + [record], key=_record_sort_key)
            self._persist(updated)
            self._records = updated
        return record

    def list_events(self, range_start: datetime, range_end: datetime) -> list[EventRecord]:
        """Records whose [start, end) intersects [range_start, range_end), in order."""
        range_start, range_end = as_utc(range_start), as_utc(range_end)
        if not range_start < range_end:
            raise ValueError("range_start must precede range_end")
        with self._lock:
            return [
                record
                for record in self._records
                if as_utc(record.event.start) < range_end
                and range_start < as_utc(record.event.end)
            ]

    def find_conflicts(self, candidate: ResolvedEvent) -> list[EventRecord]:
        """Records overlapping the candidate window (half-open)."""
        candidate_start, candidate_end = as_utc(candidate.start), as_utc(candidate.end)
        with self._lock:
            return [
                record
                for record in self._records
                if as_utc(record.event.start) < candidate_end
                and candidate_start < as_utc(record.event.end)
            ]

    def set_external_id(self, record_id: str, external_id: str) -> EventRecord:
        """Mark a record as synced to the provider; persists the update."""
        with self._lock:
            for i, record in enumerate(self._records):
                if record.id != record_id:
                    continue
                if record.external_id == external_id:
                    return record
                if record.external_id is not None:
                    raise StoreError(f"record {record_id} already has an external id")
                updated_record = EventRecord(
                    id=record.id,
                    event=record.event,
                    created_at=record.created_at,
                    external_id=external_id,
                )
                updated = list(self._records)
                updated[i] = updated_record
                self._persist(updated)
                self._records = updated
                return updated_record
        raise StoreError(f"no record with id {record_id}")
