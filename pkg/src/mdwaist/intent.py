"""Transcript to validated intent: prompts, LLM reply repair, rule-based fallback.

The primary route sends a deterministic prompt to a chat-completion backend
and repairs/validates the reply. The secondary route is a small fixed grammar
over the transcript; it needs no network, so it doubles as the offline
fallback and as a differential-testing oracle for the LLM route.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import httpx

from .model import (
    IntentValidationError,
    ReferenceClock,
    SchedulingIntent,
    validate_intent,
)
from .temporal import MONTH_NUMBERS, WEEKDAY_NUMBERS
from .trigger import DEFAULT_KEYWORDS, find_keyword


class IntentParseError(ValueError):
    """No JSON object could be recovered from an LLM reply."""


class IntentExtractionError(RuntimeError):
    """Neither the LLM route nor the fallback grammar produced a usable intent."""


class LlmBackendError(RuntimeError):
    """The chat-completion backend failed (network, HTTP, or malformed reply)."""


# ---------------------------------------------------------------------------
# Prompt construction

INTENT_JSON_SCHEMA = """\
{
  "action": "create_event",
  "attendee": string or null,
  "date_expression": string or null,
  "time_expression": string or null,
  "duration_minutes": integer 1-1440 or null,
  "description": string or null
}"""

PROMPT_TEMPLATE = """\
Extract the scheduling request from the utterance below.

Current time: {reference_iso}

Utterance: {transcript}

Reply with JSON only: a single object with exactly these keys and no others.
{schema}

Use null for anything the utterance does not state. Keep date and time
expressions verbatim from the utterance (for example "next Tuesday", "2");
do not convert them to absolute dates or times.
"""


def build_prompt(transcript: str, clock: ReferenceClock) -> str:
    """Deterministic prompt: transcript verbatim, reference instant, schema."""
    return PROMPT_TEMPLATE.format(
        reference_iso=clock.local_now().isoformat(),
        transcript=transcript,
        schema=INTENT_JSON_SCHEMA,
    )


# ---------------------------------------------------------------------------
# Reply repair

_FENCE_MARKER_RE = re.compile(r"```[A-Za-z0-9_-]*")


def _first_json_object(text: str) -> str | None:
    """First balanced {...} block; braces inside JSON strings don't count."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def parse_response(raw: str) -> SchedulingIntent:
    """Strip code fences, take the first balanced JSON object, validate it."""
    cleaned = _FENCE_MARKER_RE.sub("", raw)
    block = _first_json_object(cleaned)
    if block is None:
        raise IntentParseError("no JSON object found in response")
    return validate_intent(block)


# ---------------------------------------------------------------------------
# Rule-based fallback grammar

_WEEKDAY_ALT = "|".join(WEEKDAY_NUMBERS)
_MONTH_ALT = "|".join(MONTH_NUMBERS)

_DATE_RE = re.compile(
    rf"\b(?:next\s+(?:{_WEEKDAY_ALT})"
    rf"|(?:on\s+)?(?:{_MONTH_ALT})\s+\d{{1,2}}(?:st|nd|rd|th)?\b"
    rf"|today|tomorrow"
    rf"|(?:{_WEEKDAY_ALT}))\b",
    re.IGNORECASE,
)

_TIME_CORE = r"(?:noon|midnight|\d{1,2}(?::\d{2})?(?!\d)(?:\s*(?:a\.m\.|p\.m\.|am\b|pm\b))?)"
_AT_TIME_RE = re.compile(rf"\bat\s+({_TIME_CORE})", re.IGNORECASE)

_DURATION_RE = re.compile(r"\b(\d+)\s+(minutes?|hours?)\b", re.IGNORECASE)

_NAME_WORD = r"[A-Z][A-Za-z'’-]*"
# Honorifics ordered longest-first ("Mrs" before "Mr") and guarded against
# matching the head of a longer name ("Dr" in "Drake").
_HONORIFIC = r"(?:Mrs|Mr|Ms|Dr)\.?(?!\w)"
_ATTENDEE_RE = re.compile(
    rf"\b(?i:with)\s+((?:{_HONORIFIC}\s+)?{_NAME_WORD}(?:\s+{_NAME_WORD})*)"
)
_NAME_TOKEN_RE = re.compile(rf"{_HONORIFIC}|{_NAME_WORD}")

# Capitalized words that end a name phrase (they belong to date/time grammar).
_NAME_STOP_WORDS = (
    set(WEEKDAY_NUMBERS)
    | set(MONTH_NUMBERS)
    | {"today", "tomorrow", "next", "at", "on", "this"}
)

_ARTICLES = {"a", "an", "the"}


def _find_attendee(text: str) -> tuple[str, int] | None:
    """Name phrase after 'with': optional honorific plus capitalized tokens.

    Returns (attendee, char offset of the 'with') for the first 'with' that
    yields a usable name.
    """
    for match in _ATTENDEE_RE.finditer(text):
        phrase_start = match.start(1)
        kept_end = None
        saw_name = False
        for token in _NAME_TOKEN_RE.finditer(text, phrase_start, match.end(1)):
            word = token.group(0)
            if word.rstrip(".").lower() in ("mr", "ms", "mrs", "dr"):
                kept_end = token.end()
                continue
            if word.lower() in _NAME_STOP_WORDS:
                break
            kept_end = token.end()
            saw_name = True
        if saw_name:
            return text[phrase_start:kept_end], match.start()
    return None


def _find_duration(text: str) -> tuple[int, re.Match] | None:
    match = _DURATION_RE.search(text)
    if match is None:
        return None
    value = int(match.group(1))
    if match.group(2).lower().startswith("hour"):
        value *= 60
    return value, match


def _extract_description(text: str, start: int, end: int) -> str | None:
    """Head noun phrase in [start, end): drop duration/date/time matches and articles."""
    if end <= start:
        return None
    segment = text[start:end]
    segment = _DURATION_RE.sub(" ", segment)
    segment = _AT_TIME_RE.sub(" ", segment)
    segment = _DATE_RE.sub(" ", segment)
    words = [w.strip(".,!?;:") for w in segment.split()]
    words = [w for w in words if w]
    while words and words[0].lower() in _ARTICLES:
        words.pop(0)
    return " ".join(words) or None


def extract_fallback(transcript: str, keywords=DEFAULT_KEYWORDS) -> SchedulingIntent:
    """Apply the fixed grammar; deterministic and offline.

    Raises IntentExtractionError when no date or time expression is found
    (nothing to resolve) or the extracted fields violate the intent schema.
    """
    date_match = _DATE_RE.search(transcript)
    date_expression = date_match.group(0) if date_match else None

    time_match = _AT_TIME_RE.search(transcript)
    time_expression = time_match.group(1) if time_match else None

    duration_found = _find_duration(transcript)
    duration_minutes = duration_found[0] if duration_found else None

    attendee_found = _find_attendee(transcript)
    attendee = attendee_found[0] if attendee_found else None

    trigger_hit = find_keyword(transcript, keywords)
    desc_start = trigger_hit[2] if trigger_hit else 0
    with_match = re.compile(r"\bwith\b", re.IGNORECASE).search(transcript, desc_start)
    if with_match:
        desc_end = with_match.start()
    else:
        desc_end = min(
            [
                m.start()
                for m in (date_match, time_match, duration_found[1] if duration_found else None)
                if m is not None and m.start() >= desc_start
            ]
            or [len(transcript)]
        )
    description = _extract_description(transcript, desc_start, desc_end)

    if date_expression is None and time_expression is None:
        raise IntentExtractionError("no date or time expression found in transcript")

    intent = SchedulingIntent(
        attendee=attendee,
        date_expression=date_expression,
        time_expression=time_expression,
        duration_minutes=duration_minutes,
        description=description,
    )
    try:
        return validate_intent(intent.to_json())
    except IntentValidationError as exc:
        raise IntentExtractionError(f"fallback grammar produced an invalid intent: {exc}") from exc


# ---------------------------------------------------------------------------
# Chat-completion backends

DEFAULT_MAX_TOKENS = 512


@dataclass(frozen=True)
class LlmRequest:
    prompt: str
    model_name: str
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


class HttpChatBackend:
    """Client for an OpenAI-convention chat-completions endpoint."""

    def __init__(self, base_url: str, api_key: str, model_name: str, timeout: float = 15.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model_name = model_name
        self.timeout = timeout

    def complete(self, request: LlmRequest) -> str:
        body = {
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise LlmBackendError(f"chat request failed: {exc}") from exc
        if response.status_code != 200:
            raise LlmBackendError(f"chat endpoint returned HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise LlmBackendError(f"malformed chat response: {exc}") from exc
        if not isinstance(content, str):
            raise LlmBackendError("malformed chat response: content is not text")
        return content


class ScriptedChatBackend:
    """Replays canned replies in order; records the prompts it saw."""

    model_name = "scripted"

    def __init__(self, replies):
        self.replies = list(replies)
        self.prompts: list[str] = []

    def complete(self, request: LlmRequest) -> str:
        self.prompts.append(request.prompt)
        if not self.replies:
            raise LlmBackendError("scripted backend has no replies left")
        return self.replies.pop(0)


class UnreachableChatBackend:
    """Offline stand-in for a live model; every call fails over to the fallback."""

    model_name = "unreachable"

    def complete(self, request: LlmRequest) -> str:
        raise LlmBackendError("no live chat endpoint configured")


# ---------------------------------------------------------------------------
# Extraction orchestration

@dataclass(frozen=True)
class ExtractionResult:
    intent: SchedulingIntent
    provenance: str  # "llm" or "fallback"
    raw_response: str | None

    def __post_init__(self):
        if self.provenance not in ("llm", "fallback"):
            raise ValueError(f"unknown provenance: {self.provenance!r}")
        if self.provenance == "llm" and self.raw_response is None:
            raise ValueError("llm provenance requires the raw response")


def extract(
    transcript: str,
    clock: ReferenceClock,
    backend,
    keywords=DEFAULT_KEYWORDS,
) -> ExtractionResult:
    """LLM extraction with one retry on an invalid reply, then grammar fallback.

    A backend failure or two invalid replies routes to extract_fallback. If
    the fallback also fails, raises IntentExtractionError carrying both causes.
    """
    request = LlmRequest(prompt=build_prompt(transcript, clock), model_name=backend.model_name)
    causes: list[str] = []
    for _ in range(2):
        try:
            raw = backend.complete(request)
        except LlmBackendError as exc:
            causes.append(f"backend: {exc}")
            break
        try:
            return ExtractionResult(parse_response(raw), "llm", raw)
        except (IntentParseError, IntentValidationError) as exc:
            causes.append(f"invalid reply: {exc}")

    try:
        intent = extract_fallback(transcript, keywords)
    except IntentExtractionError as exc:
        causes.append(f"fallback: {exc}")
        raise IntentExtractionError("; ".join(causes)) from exc
    return ExtractionResult(intent, "fallback", None)
