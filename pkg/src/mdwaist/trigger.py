"""Keyword trigger detection: does a transcript contain a scheduling command?"""

from __future__ import annotations

import re
from dataclasses import dataclass

DEFAULT_KEYWORDS = frozenset({"schedule", "book", "set up", "arrange"})


@dataclass(frozen=True)
class TriggerMatch:
    """Earliest whole-word keyword hit; ``span`` is [start, end) byte offsets."""

    keyword: str
    span: tuple[int, int]


def find_keyword(text: str, keywords=DEFAULT_KEYWORDS) -> tuple[str, int, int] | None:
    """Earliest case-insensitive whole-word keyword match, as character offsets.

    Multi-word keywords match as a contiguous word sequence separated by single
    spaces. At equal offsets the longest keyword wins. Returns
    (keyword, char_start, char_end) or None.
    """
    keyset = {k.lower() for k in keywords}
    if not keyset or not all(k.strip() for k in keyset):
        raise ValueError("keywords must be a non-empty set of non-empty words")
    ordered = sorted(keyset, key=len, reverse=True)
    pattern = re.compile(
        r"(?<!\w)(?:" + "|".join(re.escape(k) for k in ordered) + r")(?!\w)",
        re.IGNORECASE,
    )
    pos = 0
    while True:
        match = pattern.search(text, pos)
        if match is None:
            return None
        keyword = match.group(0).lower()
        if keyword in keyset:
            return keyword, match.start(), match.end()
        pos = match.start() + 1  # exotic case-fold artifact; keep scanning


def detect(text: str, keywords=DEFAULT_KEYWORDS) -> TriggerMatch | None:
    """Earliest whole-word keyword match with UTF-8 byte offsets, or None."""
    found = find_keyword(text, keywords)
    if found is None:
        return None
    keyword, start, end = found
    byte_start = len(text[:start].encode("utf-8"))
    byte_end = byte_start + len(text[start:end].encode("utf-8"))
    return TriggerMatch(keyword=keyword, span=(byte_start, byte_end))
