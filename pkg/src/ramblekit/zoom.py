"""Zoom levels and their word budgets.

A document can be read at four fixed lengths. FULL is the text itself; the
other three are generated summaries whose length is capped by a budget
derived from the source word count.
"""

from __future__ import annotations

import math
from enum import Enum

from ramblekit.errors import BadRequestError


class ZoomLevel(str, Enum):
    FULL = "full"
    HALF = "half"
    QUARTER = "quarter"
    GIST = "gist"


# Levels that require generated summaries, in decreasing length order.
SUMMARY_LEVELS = (ZoomLevel.HALF, ZoomLevel.QUARTER, ZoomLevel.GIST)

# A gist is never forced below a readable floor.
GIST_FLOOR_WORDS = 5


def word_budget(level: ZoomLevel, source_words: int) -> int:
    """Maximum summary length in words for a source of ``source_words``.

    Raises:
        ValueError: if ``source_words`` is not positive.
    """
    if source_words < 1:
        raise ValueError("source_words must be at least 1")
    if level is ZoomLevel.FULL:
        return source_words
    if level is ZoomLevel.HALF:
        return math.ceil(source_words / 2)
    if level is ZoomLevel.QUARTER:
        return math.ceil(source_words / 4)
    if level is ZoomLevel.GIST:
        return max(GIST_FLOOR_WORDS, math.ceil(source_words / 10))
    raise ValueError(f"unknown zoom level: {level!r}")


def parse_level(value: str) -> ZoomLevel:
    try:
        return ZoomLevel(value.lower())
    except ValueError:
        raise BadRequestError(f"unknown zoom level: {value!r}") from None
