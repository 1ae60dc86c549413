"""Per-utterance pipeline orchestration and live stage-event fan-out.

Each utterance runs as one session emitting an ordered stream of stage
events: received, then either ignored (no trigger keyword) or triggered →
extracted → resolved → created, with pending_confirmation interposed when
confirm mode is on. Audio sessions add a transcribed stage right after
received. Errors surface as a terminal failed stage with a structured
cause; a trigger miss is ignored, never an error. Sessions ending in
ignored, cancelled, or failed leave the store untouched.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from zoneinfo import ZoneInfo

from . import intent as intent_mod
from . import stt as stt_mod
from . import temporal, trigger
from .calendar_store import CalendarStore, StoreError
from .config import GatewayConfig
from .model import EventRecord, ReferenceClock, ResolvedEvent, derive_title
from .provider import ProviderSyncError, sync_external

logger = logging.getLogger(__name__)

STAGE_RECEIVED = "received"
STAGE_IGNORED = "ignored"
STAGE_TRANSCRIBED = "transcribed"
STAGE_TRIGGERED = "triggered"
STAGE_EXTRACTED = "extracted"
STAGE_RESOLVED = "resolved"
STAGE_PENDING = "pending_confirmation"
STAGE_CREATED = "created"
STAGE_CANCELLED = "cancelled"
STAGE_FAILED = "failed"

STAGES = (
    STAGE_RECEIVED,
    STAGE_IGNORED,
    STAGE_TRANSCRIBED,
    STAGE_TRIGGERED,
    STAGE_EXTRACTED,
    STAGE_RESOLVED,
    STAGE_PENDING,
    STAGE_CREATED,
    STAGE_CANCELLED,
    STAGE_FAILED,
)

TERMINAL_STAGES = frozenset({STAGE_IGNORED, STAGE_CANCELLED, STAGE_FAILED, STAGE_CREATED})

# Legal successor stages, for protocol-conformance checks.
STAGE_TRANSITIONS = {
    STAGE_RECEIVED: {STAGE_IGNORED, STAGE_TRIGGERED, STAGE_TRANSCRIBED, STAGE_FAILED},
    STAGE_TRANSCRIBED: {STAGE_IGNORED, STAGE_TRIGGERED, STAGE_FAILED},
    STAGE_TRIGGERED: {STAGE_EXTRACTED, STAGE_FAILED},
    STAGE_EXTRACTED: {STAGE_RESOLVED, STAGE_FAILED},
    STAGE_RESOLVED: {STAGE_CREATED, STAGE_PENDING, STAGE_FAILED},
    STAGE_PENDING: {STAGE_CREATED, STAGE_CANCELLED},
}


class UnknownPendingError(RuntimeError):
    """Confirm/cancel referenced a pending event that is unknown or expired."""


@dataclass(frozen=True)
class StageEvent:
    session_id: str
    seq: int
    stage: str
    payload: dict
    at: datetime

    def to_wire(self) -> dict:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "stage": self.stage,
            "payload": self.payload,
            "at": self.at.isoformat(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_wire(), ensure_ascii=False)


class EventBus:
    """Fan-out of stage events to any number of subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.SimpleQueue] = []

    def subscribe(self) -> queue.SimpleQueue:
        subscription: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._subscribers.append(subscription)
        return subscription

    def unsubscribe(self, subscription: queue.SimpleQueue) -> None:
        with self._lock:
            if subscription in self._subscribers:
                self._subscribers.remove(subscription)

    def publish(self, event: StageEvent) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for subscription in subscribers:
            subscription.put(event)


@dataclass
class _Session:
    session_id: str
    seq: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class PendingEvent:
    """A resolved event awaiting operator confirm/cancel while confirm mode is on."""

    pending_id: str
    resolved: ResolvedEvent
    expires_at: datetime
    session: _Session
    decided: threading.Event = field(default_factory=threading.Event)
    terminal: StageEvent | None = None


def _record_summary(record: EventRecord) -> dict:
    return {
        "id": record.id,
        "title": record.event.title,
        "start": record.event.start.isoformat(),
        "end": record.event.end.isoformat(),
    }


class Gateway:
    """Owns the store, the backends, and the stage machine for every session."""

    def __init__(self, config: GatewayConfig, store=None, llm_backend=None, stt_backend=None):
        self.config = config
        self.store = store if store is not None else CalendarStore(config.store_path)
        if llm_backend is not None:
            self.llm_backend = llm_backend
        elif config.llm is not None:
            self.llm_backend = intent_mod.HttpChatBackend(
                base_url=config.llm.base_url,
                api_key=config.llm.api_key,
                model_name=config.llm.model_name,
                timeout=config.llm.timeout,
            )
        else:
            self.llm_backend = intent_mod.UnreachableChatBackend()
        if stt_backend is not None:
            self.stt_backend = stt_backend
        elif config.stt.mode == "cloud":
            self.stt_backend = stt_mod.CloudSttBackend(
                url=config.stt.cloud_url,
                api_key=config.stt.cloud_api_key or "",
                timeout=config.stt.timeout,
            )
        else:
            self.stt_backend = stt_mod.MockSttBackend()
        self.bus = EventBus()
        self._pending: dict[str, PendingEvent] = {}
        self._pending_lock = threading.Lock()

    # -- clock and ids ------------------------------------------------------

    def reference_clock(self) -> ReferenceClock:
        now = self.config.fixed_now or datetime.now(ZoneInfo(self.config.timezone))
        return ReferenceClock(now=now, timezone=self.config.timezone)

    @staticmethod
    def new_session_id() -> str:
        return uuid.uuid4().hex[:12]

    # -- event emission -----------------------------------------------------

    def _session(self, session_id: str | None) -> _Session:
        return _Session(session_id=session_id or self.new_session_id())

    def _emit(self, session: _Session, stage: str, payload: dict) -> StageEvent:
        with session.lock:
            session.seq += 1
            event = StageEvent(
                session_id=session.session_id,
                seq=session.seq,
                stage=stage,
                payload=payload,
                at=datetime.now(timezone.utc),
            )
        logger.debug("session %s stage %s", session.session_id, stage)
        self.bus.publish(event)
        return event

    def _fail(self, session: _Session, stage: str, message: str) -> StageEvent:
        return self._emit(
            session, STAGE_FAILED, {"error": {"stage": stage, "message": message}}
        )

    # -- pipeline entry points ----------------------------------------------

    def handle_utterance(self, text: str, session_id: str | None = None) -> StageEvent:
        """Run one text utterance through the pipeline; returns the terminal event."""
        session = self._session(session_id)
        self._emit(session, STAGE_RECEIVED, {"text": text})
        return self._continue_with_text(session, text)

    def handle_audio(
        self, audio: bytes, session_id: str | None = None, source_path: Path | None = None
    ) -> StageEvent:
        """Run one audio utterance: transcribe first, then the shared tail."""
        session = self._session(session_id)
        self._emit(session, STAGE_RECEIVED, {"audio_bytes": len(audio)})
        try:
            transcript = stt_mod.transcribe(audio, self.stt_backend, source_path=source_path)
        except stt_mod.SttError as exc:
            return self._fail(session, STAGE_TRANSCRIBED, str(exc))
        self._emit(
            session, STAGE_TRANSCRIBED, {"text": transcript.text, "source": transcript.source}
        )
        return self._continue_with_text(session, transcript.text)

    def _continue_with_text(self, session: _Session, text: str) -> StageEvent:
        match = trigger.detect(text, self.config.trigger_keywords)
        if match is None:
            return self._emit(session, STAGE_IGNORED, {"reason": "no trigger keyword matched"})
        self._emit(
            session,
            STAGE_TRIGGERED,
            {"keyword": match.keyword, "span": list(match.span), "text": text},
        )

        clock = self.reference_clock()
        try:
            result = intent_mod.extract(
                text, clock, self.llm_backend, self.config.trigger_keywords
            )
        except intent_mod.IntentExtractionError as exc:
            return self._fail(session, STAGE_EXTRACTED, str(exc))
        self._emit(
            session,
            STAGE_EXTRACTED,
            {"intent": result.intent.to_dict(), "provenance": result.provenance},
        )

        try:
            start, end = temporal.resolve_window(
                result.intent,
                clock,
                default_duration_minutes=self.config.default_duration_minutes,
                default_start_time=self.config.default_start_time,
            )
        except temporal.TemporalResolutionError as exc:
            return self._fail(session, STAGE_RESOLVED, str(exc))
        resolved = ResolvedEvent(
            intent=result.intent, start=start, end=end, title=derive_title(result.intent)
        )
        conflicts = self.store.find_conflicts(resolved)
        self._emit(
            session,
            STAGE_RESOLVED,
            {
                "start": start.isoformat(),
                "end": end.isoformat(),
                "title": resolved.title,
                "conflicts": [_record_summary(record) for record in conflicts],
            },
        )

        if self.config.confirm_mode:
            return self._await_confirmation(session, resolved)
        return self._commit(session, resolved)

    # -- commit and confirmation --------------------------------------------

    def _commit(self, session: _Session, resolved: ResolvedEvent) -> StageEvent:
        try:
            record = self.store.create_event(resolved)
        except StoreError as exc:
            return self._fail(session, STAGE_CREATED, str(exc))
        sync_info: dict = {"status": "skipped"}
        if self.config.provider is not None:
            try:
                external_id = sync_external(record, self.config.provider, self.store)
                sync_info = {"status": "ok", "external_id": external_id}
            except (ProviderSyncError, StoreError) as exc:
                sync_info = {"status": "failed", "error": str(exc)}
        return self._emit(
            session, STAGE_CREATED, {"record_id": record.id, "external_sync": sync_info}
        )

    def _await_confirmation(self, session: _Session, resolved: ResolvedEvent) -> StageEvent:
        pending = PendingEvent(
            pending_id=uuid.uuid4().hex[:12],
            resolved=resolved,
            expires_at=datetime.now(timezone.utc)
            + timedelta(seconds=self.config.pending_expiry_seconds),
            session=session,
        )
        with self._pending_lock:
            self._pending[pending.pending_id] = pending
        self._emit(
            session,
            STAGE_PENDING,
            {
                "pending_id": pending.pending_id,
                "expires_at": pending.expires_at.isoformat(),
                "start": resolved.start.isoformat(),
                "end": resolved.end.isoformat(),
                "title": resolved.title,
            },
        )
        if not pending.decided.wait(timeout=self.config.pending_expiry_seconds):
            with self._pending_lock:
                owned = self._pending.pop(pending.pending_id, None)
            if owned is not None:
                return self._emit(
                    session,
                    STAGE_CANCELLED,
                    {"pending_id": pending.pending_id, "reason": "expired"},
                )
            pending.decided.wait()  # a decision raced the timeout; let it finish
        return pending.terminal

    def _take_pending(self, pending_id: str) -> PendingEvent:
        with self._pending_lock:
            pending = self._pending.get(pending_id)
            if pending is None:
                raise UnknownPendingError(f"unknown pending event: {pending_id}")
            if datetime.now(timezone.utc) >= pending.expires_at:
                raise UnknownPendingError(f"pending event expired: {pending_id}")
            return self._pending.pop(pending_id)

    def confirm(self, pending_id: str) -> StageEvent:
        """Commit a pending event; emits and returns the created stage."""
        pending = self._take_pending(pending_id)
        terminal = self._commit(pending.session, pending.resolved)
        pending.terminal = terminal
        pending.decided.set()
        return terminal

    def cancel(self, pending_id: str) -> StageEvent:
        """Discard a pending event; emits and returns the cancelled stage."""
        pending = self._take_pending(pending_id)
        terminal = self._emit(
            pending.session,
            STAGE_CANCELLED,
            {"pending_id": pending_id, "reason": "cancelled by operator"},
        )
        pending.terminal = terminal
        pending.decided.set()
        return terminal
