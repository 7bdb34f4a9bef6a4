"""Small text helpers shared across modules: normalization, sentence
segmentation, word counting, and content hashing."""

from __future__ import annotations

import hashlib
import re

# Common abbreviations that end with a period but do not end a sentence.
# Good enough for cleaned dictation transcripts; not a general NLP segmenter.
_ABBREVIATIONS = frozenset(
    {
        "mr.",
        "mrs.",
        "ms.",
        "dr.",
        "prof.",
        "st.",
        "vs.",
        "etc.",
        "e.g.",
        "i.e.",
        "fig.",
        "no.",
    }
)

_TERMINAL_RUN = re.compile(r"[.!?]+(?=\s)")


def normalize_whitespace(text: str) -> str:
    """Collapse every whitespace run to a single space and strip the ends."""
    return " ".join(text.split())


def word_count(text: str) -> int:
    return len(text.split())


def text_hash(text: str) -> str:
    """Stable content hash: a pure function of the text bytes."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def split_sentences(text: str, require_case: bool = True) -> list[str]:
    """Split text into sentences on terminal punctuation.

    A boundary is a run of ``.!?`` followed by whitespace and, when
    ``require_case`` is set, an uppercase letter or digit; a token ending the
    run that is a known abbreviation never splits. Passing
    ``require_case=False`` suits raw dictation where capitalization does not
    exist yet. The input is whitespace-normalized first, so joining the
    returned sentences with single spaces reproduces the normalized text
    exactly.
    """
    normalized = normalize_whitespace(text)
    if not normalized:
        return []
    sentences = []
    start = 0
    for match in _TERMINAL_RUN.finditer(normalized):
        end = match.end()
        following = normalized[end + 1 :]
        if not following:
            continue
        if require_case and not (following[0].isupper() or following[0].isdigit()):
            continue
        last_word = normalized[start:end].rsplit(None, 1)[-1].lower()
        if last_word in _ABBREVIATIONS:
            continue
        sentences.append(normalized[start:end])
        start = end + 1  # skip exactly the single separating space
    tail = normalized[start:]
    if tail:
        sentences.append(tail)
    return sentences
