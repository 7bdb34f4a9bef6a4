"""Prompt rendering.

Each generation kind maps to exactly one versioned template resource. The
shipped v1 template bytes are frozen; rendering only substitutes the slot
markers and drops the keyword clauses when there are no keywords to name.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Sequence

from ramblekit.errors import BadRequestError
from ramblekit.textutil import word_count
from ramblekit.zoom import ZoomLevel

PROMPT_VERSION = "v1"

# role/content pairs, system first
Message = tuple[str, str]


class PromptKind(str, Enum):
    CLEAN = "clean"
    SUMMARIZE = "summarize"
    SEMANTIC_SPLIT = "split"
    SEMANTIC_MERGE = "merge"
    CUSTOM_TRANSFORM = "transform"


_TEXT_SLOT = "[User Ramble text]"
_KEYWORDS_SLOT = "[list of keywords]"
_LEVEL_SLOT = "[LEVEL TEXT]"
_MERGE_TEXTS_SLOT = "[Text from selected user Rambles, concatenated with newline]"
_CUSTOM_PROMPT_SLOT = "[User custom prompt]"

# Clauses removed verbatim when no keywords are supplied.
_SUMMARIZE_KEYWORD_SENTENCES = (
    "You should use the following keywords to help you determine what to "
    "focus the summary on. Ensure that each keyword is in the summary. "
    "Try to fit as many as makes sense. "
)
_KEYWORDS_TAIL = f"\n\nThe keywords are: {_KEYWORDS_SLOT}."
_MERGE_KEYWORD_BLOCK = (
    "\n\nYou may use the following keywords to help you merge the text. "
    "Ensure that each keyword is in the merged paragraph." + _KEYWORDS_TAIL
)

_TEMPLATE_FILES = {
    PromptKind.CLEAN: "clean.txt",
    PromptKind.SUMMARIZE: "summarize.txt",
    PromptKind.SEMANTIC_SPLIT: "split.txt",
    PromptKind.SEMANTIC_MERGE: "merge.txt",
    PromptKind.CUSTOM_TRANSFORM: "transform.txt",
}

_REQUIRED_FRAGMENTS = {
    PromptKind.SUMMARIZE: (_SUMMARIZE_KEYWORD_SENTENCES, _KEYWORDS_TAIL, _LEVEL_SLOT),
    PromptKind.SEMANTIC_MERGE: (_MERGE_KEYWORD_BLOCK, _MERGE_TEXTS_SLOT),
    PromptKind.CUSTOM_TRANSFORM: (_KEYWORDS_TAIL, _CUSTOM_PROMPT_SLOT),
}


@lru_cache(maxsize=None)
def template_text(kind: PromptKind) -> str:
    """The raw template bytes for a kind, decoded as UTF-8."""
    name = _TEMPLATE_FILES[kind]
    path = resources.files("ramblekit").joinpath(
        f"data/prompts/{PROMPT_VERSION}/{name}"
    )
    text = path.read_text(encoding="utf-8")
    for fragment in _REQUIRED_FRAGMENTS.get(kind, ()):
        if fragment not in text:
            raise ValueError(f"{name} template is missing a required fragment")
    return text


def level_text(level: ZoomLevel, source_words: int) -> str:
    """The length instruction for a summary prompt.

    GIST is a fixed five-word cap; the other levels name the source length
    divided down, e.g. "120 / 2 words or less".
    """
    if level is ZoomLevel.GIST:
        return "5 words or less"
    if level is ZoomLevel.QUARTER:
        return f"{source_words} / 4 words or less"
    if level is ZoomLevel.HALF:
        return f"{source_words} / 2 words or less"
    raise BadRequestError(f"no summary prompt for level: {level.value}")


def _keyword_list(keywords: Sequence[str]) -> str:
    return ", ".join(keywords)


def render_prompt(
    kind: PromptKind,
    *,
    text: str | None = None,
    texts: Sequence[str] | None = None,
    keywords: Sequence[str] = (),
    level: ZoomLevel | None = None,
    user_prompt: str | None = None,
    include_keywords: bool = True,
) -> tuple[Message, ...]:
    """Render the messages for one generation call.

    Args:
        text: the ramble text (clean, summarize, split, transform).
        texts: the ramble texts to merge, in document order.
        keywords: active keywords in first-occurrence order.
        level: target zoom level for summaries.
        user_prompt: the custom instruction for transforms.
        include_keywords: whether a transform names the keywords.

    Raises:
        BadRequestError: when the inputs do not fit the kind.
    """
    if kind is PromptKind.CLEAN:
        _require_text(text)
        return (("system", template_text(kind)), ("user", text))

    if kind is PromptKind.SUMMARIZE:
        _require_text(text)
        if level is None or level is ZoomLevel.FULL:
            raise BadRequestError("summaries need a half, quarter, or gist level")
        system = template_text(kind).replace(
            _LEVEL_SLOT, level_text(level, word_count(text))
        )
        system = _apply_keywords(
            system, keywords, (_SUMMARIZE_KEYWORD_SENTENCES, _KEYWORDS_TAIL)
        )
        return (("system", system), ("user", text))

    if kind is PromptKind.SEMANTIC_SPLIT:
        _require_text(text)
        return (("system", template_text(kind)), ("user", text))

    if kind is PromptKind.SEMANTIC_MERGE:
        if not texts or len(texts) < 2:
            raise BadRequestError("merging needs at least two texts")
        system = template_text(kind).replace(_MERGE_TEXTS_SLOT, "\n".join(texts))
        system = _apply_keywords(system, keywords, (_MERGE_KEYWORD_BLOCK,))
        return (("system", system),)

    if kind is PromptKind.CUSTOM_TRANSFORM:
        _require_text(text)
        if not user_prompt or not user_prompt.strip():
            raise BadRequestError("transform needs a prompt")
        system = template_text(kind).replace(_CUSTOM_PROMPT_SLOT, user_prompt)
        effective = keywords if include_keywords else ()
        system = _apply_keywords(system, effective, (_KEYWORDS_TAIL,))
        return (("system", system), ("user", text))

    raise BadRequestError(f"unknown prompt kind: {kind!r}")


def _require_text(text: str | None) -> None:
    if not text or not text.strip():
        raise BadRequestError("text must not be empty")


def _apply_keywords(
    system: str, keywords: Sequence[str], removable: tuple[str, ...]
) -> str:
    if keywords:
        return system.replace(_KEYWORDS_SLOT, _keyword_list(keywords))
    for fragment in removable:
        system = system.replace(fragment, "")
    return system
