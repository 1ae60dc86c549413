"""Deterministic resolution of natural-language date/time expressions.

Everything here is pure: the reference instant arrives as an explicit
parameter, never from the system clock. Conventions:

* "next <weekday>" (and a bare weekday) is the first matching date strictly
  after the reference date.
* A month-day without a year rolls into next year once it has passed —
  nothing resolves into the past.
* Bare hours follow clinic business hours: 1-7 means afternoon (PM),
  8-12 means morning. Hours 13-23 are read as 24-hour times.
* Wall times that fall in a DST gap resolve to the earliest valid instant at
  or after the nominal time; ambiguous (fold-back) times take the earlier
  instant.
"""

from __future__ import annotations

import re
from datetime import date, datetime, time, timedelta, timezone

from .model import ReferenceClock, SchedulingIntent

DEFAULT_DURATION_MINUTES = 30
DEFAULT_START_TIME = time(9, 0)

WEEKDAY_NUMBERS = {
    "monday": 0,
    "tuesday": 1,
    "wednesday": 2,
    "thursday": 3,
    "friday": 4,
    "saturday": 5,
    "sunday": 6,
}

MONTH_NUMBERS = {
    "january": 1,
    "february": 2,
    "march": 3,
    "april": 4,
    "may": 5,
    "june": 6,
    "july": 7,
    "august": 8,
    "september": 9,
    "october": 10,
    "november": 11,
    "december": 12,
}

_WEEKDAY_ALT = "|".join(WEEKDAY_NUMBERS)
_MONTH_ALT = "|".join(MONTH_NUMBERS)

_NEXT_WEEKDAY_RE = re.compile(rf"^(?:next\s+)?({_WEEKDAY_ALT})$")
_MONTH_DAY_RE = re.compile(rf"^(?:on\s+)?({_MONTH_ALT})\s+(\d{{1,2}})(?:st|nd|rd|th)?$")
_CLOCK_RE = re.compile(r"^(\d{1,2})(?::(\d{2}))?\s*(a\.m\.|p\.m\.|am|pm)?$")


class TemporalResolutionError(ValueError):
    """An expression could not be resolved to a concrete date or time."""


def _normalize(expr: str) -> str:
    return re.sub(r"\s+", " ", expr.strip().lower())


def resolve_date(expr: str, reference: date) -> date:
    """Resolve a date expression relative to ``reference``."""
    text = _normalize(expr)
    if text == "today":
        return reference
    if text == "tomorrow":
        return reference + timedelta(days=1)

    match = _NEXT_WEEKDAY_RE.match(text)
    if match:
        target = WEEKDAY_NUMBERS[match.group(1)]
        days_ahead = (target - reference.weekday() - 1) % 7 + 1
        return reference + timedelta(days=days_ahead)

    match = _MONTH_DAY_RE.match(text)
    if match:
        month = MONTH_NUMBERS[match.group(1)]
        day = int(match.group(2))
        for year in (reference.year, reference.year + 1):
            try:
                candidate = date(year, month, day)
            except ValueError:
                continue
            if candidate >= reference:
                return candidate
        raise TemporalResolutionError(f"no upcoming calendar date for {expr!r}")

    raise TemporalResolutionError(f"unrecognized date expression: {expr!r}")


def resolve_time(expr: str) -> time:
    """Resolve a time expression to a time of day.

    Explicit meridiem is respected; bare hours use the 1-7 PM / 8-12 AM rule.
    """
    text = _normalize(expr)
    if text == "noon":
        return time(12, 0)
    if text == "midnight":
        return time(0, 0)

    match = _CLOCK_RE.match(text)
    if not match:
        raise TemporalResolutionError(f"unrecognized time expression: {expr!r}")
    hour = int(match.group(1))
    minute = int(match.group(2)) if match.group(2) else 0
    meridiem = match.group(3)

    if minute > 59:
        raise TemporalResolutionError(f"minutes out of range in {expr!r}")

    if meridiem:
        if not 1 <= hour <= 12:
            raise TemporalResolutionError(f"hour out of range for meridiem in {expr!r}")
        if meridiem.startswith("p"):
            hour = 12 if hour == 12 else hour + 12
        else:
            hour = 0 if hour == 12 else hour
    elif 1 <= hour <= 7:
        hour += 12
    elif hour > 23:
        raise TemporalResolutionError(f"hour out of range in {expr!r}")
    # 8-12 stay as given (morning; 12 means noon); 0 and 13-23 read as 24-hour.

    return time(hour, minute)


def combine_wall_time(day: date, wall: time, zone) -> datetime:
    """Attach a zone, resolving DST gaps to the earliest valid instant at/after.

    Ambiguous wall times take the earlier instant (first occurrence).
    """
    naive = datetime.combine(day, wall)
    for _ in range(26 * 60):  # far beyond any real DST gap
        candidate = naive.replace(tzinfo=zone, fold=0)
        round_trip = candidate.astimezone(timezone.utc).astimezone(zone)
        if round_trip.replace(tzinfo=None) == naive:
            return candidate
        naive += timedelta(minutes=1)
    raise TemporalResolutionError(f"no valid instant near {day} {wall} in {zone}")


def resolve_window(
    intent: SchedulingIntent,
    clock: ReferenceClock,
    default_duration_minutes: int = DEFAULT_DURATION_MINUTES,
    default_start_time: time = DEFAULT_START_TIME,
) -> tuple[datetime, datetime]:
    """Resolve an intent to concrete (start, end) instants in the clock's zone.

    Missing date defaults to the reference date; missing time to
    ``default_start_time``; missing duration to ``default_duration_minutes``.
    The end instant is exactly the chosen duration after start.
    """
    if intent.date_expression is None and intent.time_expression is None:
        raise TemporalResolutionError("intent has neither a date nor a time expression")

    local_reference = clock.local_now()
    if intent.date_expression is not None:
        day = resolve_date(intent.date_expression, local_reference.date())
    else:
        day = local_reference.date()
    wall = (
        resolve_time(intent.time_expression)
        if intent.time_expression is not None
        else default_start_time
    )
    duration = intent.duration_minutes or default_duration_minutes

    start = combine_wall_time(day, wall, clock.zone)
    end = (start.astimezone(timezone.utc) + timedelta(minutes=duration)).astimezone(clock.zone)
    return start, end
