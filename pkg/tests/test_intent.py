"""Prompt construction, LLM reply repair, fallback grammar, extraction routing."""

import json
from datetime import datetime
from pathlib import Path
from zoneinfo import ZoneInfo

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdwaist.intent import (
    ExtractionResult,
    IntentExtractionError,
    IntentParseError,
    LlmBackendError,
    LlmRequest,
    ScriptedChatBackend,
    UnreachableChatBackend,
    build_prompt,
    extract,
    extract_fallback,
    parse_response,
)
from mdwaist.model import IntentValidationError, ReferenceClock, SchedulingIntent

FIXTURES = Path(__file__).parent / "fixtures"

PHOENIX = ReferenceClock(
    now=datetime(2025, 1, 15, 10, 0, tzinfo=ZoneInfo("America/Phoenix")),
    timezone="America/Phoenix",
)

PATEL_UTTERANCE = "Schedule a meeting with Dr. Patel next Friday"
SMITH_UTTERANCE = "Schedule a follow-up with Mr. Smith next Tuesday at 2"

VALID_REPLY = json.dumps(
    {
        "action": "create_event",
        "attendee": "Dr. Patel",
        "date_expression": "next Friday",
        "time_expression": None,
        "duration_minutes": None,
        "description": "meeting",
    }
)


def load_corpus():
    data = json.loads((FIXTURES / "utterances.json").read_text(encoding="utf-8"))
    return data["utterances"]


class TestBuildPrompt:
    def test_contains_transcript_and_reference_instant(self):
        prompt = build_prompt(PATEL_UTTERANCE, PHOENIX)
        assert PATEL_UTTERANCE in prompt
        assert "2025-01-15T10:00:00-07:00" in prompt

    def test_deterministic(self):
        assert build_prompt(PATEL_UTTERANCE, PHOENIX) == build_prompt(PATEL_UTTERANCE, PHOENIX)

    def test_contains_schema(self):
        prompt = build_prompt("book 30 minutes with Dr. Lee", PHOENIX)
        assert "duration_minutes" in prompt
        for key in ("action", "attendee", "date_expression", "time_expression", "description"):
            assert key in prompt
        assert "JSON only" in prompt

    def test_reference_instant_rendered_in_configured_zone(self):
        utc_clock = ReferenceClock(
            now=datetime(2025, 1, 15, 17, 0, tzinfo=ZoneInfo("UTC")),
            timezone="America/Phoenix",
        )
        assert "2025-01-15T10:00:00-07:00" in build_prompt("book a visit", utc_clock)


def bracket_depth_scan(text):
    """Test oracle: plain brace-depth scan for the first balanced block."""
    start = text.find("{")
    if start == -1:
        return None
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


class TestParseResponse:
    def test_fenced_json(self):
        raw = (
            "```json\n"
            '{"action":"create_event","attendee":"Dr. Patel","date_expression":"next Friday",'
            '"time_expression":null,"duration_minutes":null,"description":"meeting"}\n'
            "```"
        )
        intent = parse_response(raw)
        assert intent.attendee == "Dr. Patel"

    def test_bare_empty_object_propagates_validation_error(self):
        with pytest.raises(IntentValidationError) as excinfo:
            parse_response("{}")
        assert "missing required field: action" in excinfo.value.errors

    def test_chatter_around_object(self):
        raw = (
            'Sure! Here is the event: {"action":"create_event","attendee":null,'
            '"date_expression":"tomorrow","time_expression":"9 am","duration_minutes":15,'
            '"description":null} Anything else?'
        )
        # Cross-check the extracted block with the brute-force depth scanner.
        block = bracket_depth_scan(raw)
        assert json.loads(block)["duration_minutes"] == 15
        intent = parse_response(raw)
        assert intent.date_expression == "tomorrow"
        assert intent.time_expression == "9 am"
        assert intent.duration_minutes == 15

    def test_no_object_at_all(self):
        with pytest.raises(IntentParseError):
            parse_response("I could not find a scheduling request.")

    def test_unfenced_equals_fenced(self):
        assert parse_response(VALID_REPLY) == parse_response(f"```json\n{VALID_REPLY}\n```")

    def test_braces_inside_strings_do_not_break_balance(self):
        raw = '{"action":"create_event","description":"room {3}","date_expression":"today"}'
        assert parse_response(raw).description == "room {3}"

    def test_invalid_block_propagates_not_json(self):
        with pytest.raises(IntentValidationError):
            parse_response("result: {not json at all}")


intent_strategy = st.builds(
    SchedulingIntent,
    attendee=st.none() | st.text(min_size=1, max_size=30),
    date_expression=st.none() | st.text(min_size=1, max_size=30),
    time_expression=st.none() | st.text(min_size=1, max_size=30),
    duration_minutes=st.none() | st.integers(min_value=1, max_value=1440),
    description=st.none() | st.text(min_size=1, max_size=30),
)


class TestFenceWrapProperty:
    @given(intent_strategy)
    @settings(max_examples=200)
    def test_fenced_and_bare_agree(self, intent):
        bare = intent.to_json()
        fenced = f"```json\n{bare}\n```"
        assert parse_response(fenced) == parse_response(bare)


class TestExtractFallback:
    def test_smith_utterance(self):
        intent = extract_fallback(SMITH_UTTERANCE)
        assert intent.attendee == "Mr. Smith"
        assert intent.date_expression == "next Tuesday"
        assert intent.time_expression == "2"
        assert intent.duration_minutes is None
        assert intent.description == "follow-up"

    def test_patel_utterance(self):
        intent = extract_fallback(PATEL_UTTERANCE)
        assert intent.attendee == "Dr. Patel"
        assert intent.date_expression == "next Friday"
        assert intent.time_expression is None
        assert intent.duration_minutes is None
        assert intent.description == "meeting"

    def test_duration_and_no_description(self):
        intent = extract_fallback("book 30 minutes with Dr. Lee tomorrow at 9 am")
        assert intent.attendee == "Dr. Lee"
        assert intent.date_expression == "tomorrow"
        assert intent.time_expression == "9 am"
        assert intent.duration_minutes == 30
        assert intent.description is None

    def test_corpus_exact_field_match(self):
        for case in load_corpus():
            intent = extract_fallback(case["text"])
            expected = case["intent"]
            assert intent.attendee == expected["attendee"], case["text"]
            assert intent.date_expression == expected["date_expression"], case["text"]
            assert intent.time_expression == expected["time_expression"], case["text"]
            assert intent.duration_minutes == expected["duration_minutes"], case["text"]
            assert intent.description == expected["description"], case["text"]

    def test_deterministic_over_corpus(self):
        for case in load_corpus():
            assert extract_fallback(case["text"]) == extract_fallback(case["text"])

    def test_hours_converted(self):
        assert extract_fallback("Schedule 2 hours with Dr. Kim tomorrow").duration_minutes == 120

    def test_unresolvable_without_date_or_time(self):
        with pytest.raises(IntentExtractionError):
            extract_fallback("Schedule a chat with Dr. Patel")

    def test_name_without_honorific(self):
        intent = extract_fallback("Schedule a sync with Alice Johnson next Thursday")
        assert intent.attendee == "Alice Johnson"

    def test_name_starting_like_honorific(self):
        intent = extract_fallback("Schedule a visit with Drake tomorrow")
        assert intent.attendee == "Drake"

    def test_second_with_carries_the_name(self):
        intent = extract_fallback("Schedule a sync with the team with Dr. Reed tomorrow")
        assert intent.attendee == "Dr. Reed"

    def test_out_of_range_duration_is_extraction_error(self):
        with pytest.raises(IntentExtractionError):
            extract_fallback("Schedule 4000 minutes with Dr. Kim tomorrow")


class TestLlmRequest:
    def test_temperature_bounds(self):
        with pytest.raises(ValueError):
            LlmRequest(prompt="p", model_name="m", temperature=1.5)

    def test_defaults_deterministic_decoding(self):
        request = LlmRequest(prompt="p", model_name="m")
        assert request.temperature == 0.0


class TestExtract:
    def test_valid_reply_uses_llm_provenance(self):
        backend = ScriptedChatBackend([VALID_REPLY])
        result = extract(PATEL_UTTERANCE, PHOENIX, backend)
        assert result.provenance == "llm"
        assert result.raw_response == VALID_REPLY
        assert result.intent.attendee == "Dr. Patel"
        assert len(backend.prompts) == 1
        assert PATEL_UTTERANCE in backend.prompts[0]

    def test_one_retry_then_success(self):
        backend = ScriptedChatBackend(["garbage", VALID_REPLY])
        result = extract(PATEL_UTTERANCE, PHOENIX, backend)
        assert result.provenance == "llm"
        assert len(backend.prompts) == 2

    def test_garbage_twice_falls_back(self):
        backend = ScriptedChatBackend(["garbage", "more garbage"])
        result = extract(PATEL_UTTERANCE, PHOENIX, backend)
        assert result.provenance == "fallback"
        assert result.raw_response is None
        assert result.intent == extract_fallback(PATEL_UTTERANCE)

    def test_unreachable_backend_falls_back(self):
        result = extract(PATEL_UTTERANCE, PHOENIX, UnreachableChatBackend())
        assert result.provenance == "fallback"
        assert result.intent.attendee == "Dr. Patel"

    def test_both_routes_fail_carries_both_causes(self):
        with pytest.raises(IntentExtractionError) as excinfo:
            extract("Schedule a chat with Dr. Patel", PHOENIX, UnreachableChatBackend())
        message = str(excinfo.value)
        assert "backend" in message
        assert "fallback" in message

    def test_llm_provenance_requires_raw_response(self):
        with pytest.raises(ValueError):
            ExtractionResult(SchedulingIntent(date_expression="today"), "llm", None)

    def test_backend_error_mid_retry_falls_back(self):
        class FlakyBackend:
            model_name = "flaky"

            def __init__(self):
                self.calls = 0

            def complete(self, request):
                self.calls += 1
                if self.calls == 1:
                    return "garbage"
                raise LlmBackendError("connection reset")

        result = extract(PATEL_UTTERANCE, PHOENIX, FlakyBackend())
        assert result.provenance == "fallback"
