"""Shared domain types and the strict scheduling-intent JSON contract.

The intent schema is the wire contract between the language-model stage and
everything downstream: a flat JSON object with exactly six keys, snake_case,
``action`` fixed to ``"create_event"``, and explicit ``null`` for absent
fields. Validation is strict (unknown keys rejected) and total: any input
yields either a valid :class:`SchedulingIntent` or an
:class:`IntentValidationError` listing every violation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from zoneinfo import ZoneInfo

ACTION_CREATE_EVENT = "create_event"

INTENT_FIELDS = (
    "action",
    "attendee",
    "date_expression",
    "time_expression",
    "duration_minutes",
    "description",
)

MIN_DURATION_MINUTES = 1
MAX_DURATION_MINUTES = 1440

SOURCE_MOCK = "mock"
SOURCE_CLOUD = "cloud"
TRANSCRIPT_SOURCES = (SOURCE_MOCK, SOURCE_CLOUD)


def as_utc(value: datetime) -> datetime:
    """Instant view of an aware datetime.

    Python compares/subtracts same-tzinfo datetimes on their wall-clock
    fields, which diverges from instant arithmetic across DST transitions;
    ordering and duration logic must go through this.
    """
    return value.astimezone(timezone.utc)


class IntentValidationError(ValueError):
    """Intent JSON violated the schema; ``errors`` holds one message per violation."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class SchedulingIntent:
    """Structured scheduling parameters extracted from one utterance."""

    action: str = ACTION_CREATE_EVENT
    attendee: str | None = None
    date_expression: str | None = None
    time_expression: str | None = None
    duration_minutes: int | None = None
    description: str | None = None

    def to_dict(self) -> dict:
        """Canonical form: all six keys present, absent fields as None."""
        return {name: getattr(self, name) for name in INTENT_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @property
    def is_resolvable(self) -> bool:
        return self.date_expression is not None or self.time_expression is not None


@dataclass(frozen=True)
class Transcript:
    """Final text of one utterance plus its transcription source."""

    text: str
    source: str
    captured_at: datetime

    def __post_init__(self):
        if self.source not in TRANSCRIPT_SOURCES:
            raise ValueError(f"unknown transcript source: {self.source!r}")


@dataclass(frozen=True)
class ReferenceClock:
    """The injectable 'now' every relative expression resolves against."""

    now: datetime
    timezone: str

    def __post_init__(self):
        if self.now.tzinfo is None:
            raise ValueError("reference instant must be timezone-aware")
        try:
            ZoneInfo(self.timezone)
        except Exception as exc:
            raise ValueError(f"invalid IANA timezone: {self.timezone!r}") from exc

    @property
    def zone(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)

    def local_now(self) -> datetime:
        return self.now.astimezone(self.zone)


@dataclass(frozen=True)
class ResolvedEvent:
    """An intent with all temporal expressions resolved to concrete instants."""

    intent: SchedulingIntent
    start: datetime
    end: datetime
    title: str

    def __post_init__(self):
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise ValueError("start and end must be timezone-aware")
        if not as_utc(self.start) < as_utc(self.end):
            raise ValueError("start must precede end")
        if self.intent.duration_minutes is not None:
            expected = timedelta(minutes=self.intent.duration_minutes)
            if as_utc(self.end) - as_utc(self.start) != expected:
                raise ValueError("end - start must equal duration_minutes")
        if not self.title.strip():
            raise ValueError("title must be non-empty")


@dataclass(frozen=True)
class EventRecord:
    """A persisted calendar event; ``external_id`` is set only after provider sync."""

    id: str
    event: ResolvedEvent
    created_at: datetime
    external_id: str | None = None

    def to_dict(self) -> dict:
        """Store-file form (flat; matches the on-disk event schema)."""
        return {
            "id": self.id,
            "title": self.event.title,
            "start": self.event.start.isoformat(),
            "end": self.event.end.isoformat(),
            "attendee": self.event.intent.attendee,
            "description": self.event.intent.description,
            "external_id": self.external_id,
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        intent = SchedulingIntent(
            attendee=data.get("attendee"),
            description=data.get("description"),
        )
        event = ResolvedEvent(
            intent=intent,
            start=datetime.fromisoformat(data["start"]),
            end=datetime.fromisoformat(data["end"]),
            title=data["title"],
        )
        return cls(
            id=data["id"],
            event=event,
            created_at=datetime.fromisoformat(data["created_at"]),
            external_id=data.get("external_id"),
        )


def derive_title(intent: SchedulingIntent) -> str:
    """Event title from description/attendee; providers require a non-empty summary."""
    if intent.description:
        title = intent.description[0].upper() + intent.description[1:]
        if intent.attendee:
            title += f" with {intent.attendee}"
        return title
    if intent.attendee:
        return f"Appointment with {intent.attendee}"
    return "Appointment"


def validate_intent(json_text: str | bytes) -> SchedulingIntent:
    """Validate arbitrary text claimed to be intent JSON.

    Returns the intent, or raises :class:`IntentValidationError` naming every
    violated field. Never raises anything else, for any byte sequence.
    """
    try:
        data = json.loads(json_text)
    except (ValueError, RecursionError) as exc:
        raise IntentValidationError([f"not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise IntentValidationError(["top-level value is not a JSON object"])

    errors: list[str] = []
    for key in data:
        if key not in INTENT_FIELDS:
            errors.append(f"unknown field: {key}")

    action = data.get("action")
    if "action" not in data or action is None:
        errors.append("missing required field: action")
    elif action != ACTION_CREATE_EVENT:
        errors.append(f'invalid action: expected "{ACTION_CREATE_EVENT}"')

    for name in ("attendee", "date_expression", "time_expression", "description"):
        value = data.get(name)
        if value is not None and not isinstance(value, str):
            errors.append(f"field {name} must be a string or null")

    duration = data.get("duration_minutes")
    if duration is not None:
        if isinstance(duration, bool) or not isinstance(duration, int):
            errors.append("duration_minutes must be an integer or null")
        elif not MIN_DURATION_MINUTES <= duration <= MAX_DURATION_MINUTES:
            errors.append(
                f"duration_minutes out of range [{MIN_DURATION_MINUTES}, {MAX_DURATION_MINUTES}]"
            )

    if errors:
        raise IntentValidationError(errors)

    return SchedulingIntent(
        action=ACTION_CREATE_EVENT,
        attendee=data.get("attendee"),
        date_expression=data.get("date_expression"),
        time_expression=data.get("time_expression"),
        duration_minutes=data.get("duration_minutes"),
        description=data.get("description"),
    )
