"""Voice-command scheduling gateway.

Turns natural-language scheduling commands (text or WAV audio) into calendar
events: keyword trigger detection, LLM intent extraction with a rule-based
fallback, deterministic temporal resolution, a local JSON event store with
best-effort provider sync, and a live stage-event stream for monitoring.
"""

from .calendar_store import CalendarStore, StoreError
from .config import GatewayConfig, load_config
from .intent import ExtractionResult, build_prompt, extract, extract_fallback, parse_response
from .model import (
    EventRecord,
    IntentValidationError,
    ReferenceClock,
    ResolvedEvent,
    SchedulingIntent,
    Transcript,
    derive_title,
    validate_intent,
)
from .pipeline import Gateway, StageEvent
from .provider import ProviderConfig, sync_external
from .temporal import resolve_date, resolve_time, resolve_window
from .trigger import TriggerMatch, detect

__version__ = "0.1.0"

__all__ = [
    "CalendarStore",
    "EventRecord",
    "ExtractionResult",
    "Gateway",
    "GatewayConfig",
    "IntentValidationError",
    "ProviderConfig",
    "ReferenceClock",
    "ResolvedEvent",
    "SchedulingIntent",
    "StageEvent",
    "StoreError",
    "Transcript",
    "TriggerMatch",
    "build_prompt",
    "derive_title",
    "detect",
    "extract",
    "extract_fallback",
    "load_config",
    "parse_response",
    "resolve_date",
    "resolve_time",
    "resolve_window",
    "sync_external",
    "validate_intent",
    "__version__",
]
