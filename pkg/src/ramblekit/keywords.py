"""Keyword extraction and per-ramble keyword state.

Extraction follows the rapid co-occurrence scheme: candidate phrases are
maximal runs of content words between stopwords and punctuation, each word is
scored degree/frequency over those phrases, and the top fraction of phrases
by summed word score supplies the automatic keywords. Manual toggles layer on
top and survive recomputation for as long as their word stays in the text.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ramblekit.errors import BadRequestError

# Words are unicode word-character runs; internal hyphens and apostrophes
# stay inside the token, so "state-of-the-art" and "don't" are single words.
_TOKEN = re.compile(r"\w+(?:[-']\w+)*")

_STOPWORDS_RESOURCE = "stopwords_smart.txt"


def load_stoplist(path: str | Path) -> frozenset[str]:
    """Load a stoplist file: UTF-8, one word per line, '#' comments."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word.lower())
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stoplist() -> frozenset[str]:
    """The bundled SMART English stoplist."""
    text = (
        resources.files("ramblekit").joinpath(f"data/{_STOPWORDS_RESOURCE}")
    ).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word.lower())
    return frozenset(words)


@dataclass(frozen=True)
class RakeParams:
    """Extraction settings.

    Args:
        stoplist: lowercase words that break candidate phrases; must be
            non-empty.
        max_phrase_words: phrases longer than this are truncated.
        keyword_fraction: fraction of ranked candidates selected; exact
            rational arithmetic so ceil(1/3 * 3) is 1, not 2.
    """

    stoplist: frozenset[str] = field(default_factory=default_stoplist)
    max_phrase_words: int = 3
    keyword_fraction: Fraction = Fraction(1, 3)

    def __post_init__(self):
        if not self.stoplist:
            raise ValueError("stoplist must not be empty")
        if self.max_phrase_words < 1:
            raise ValueError("max_phrase_words must be at least 1")
        if not 0 < self.keyword_fraction <= 1:
            raise ValueError("keyword_fraction must be in (0, 1]")


@dataclass(frozen=True)
class CandidatePhrase:
    words: tuple[str, ...]
    start: int  # character offset of the first word in the source text
    end: int


@dataclass(frozen=True)
class WordScore:
    freq: int
    degree: int

    @property
    def score(self) -> float:
        return self.degree / self.freq


@dataclass(frozen=True)
class ScoredPhrase:
    words: tuple[str, ...]
    start: int
    score: float


@dataclass(frozen=True)
class RakeExtraction:
    ranked: list[ScoredPhrase]
    selected: list[ScoredPhrase]
    auto_words: list[str]  # union of selected phrase words, first-seen order
    scores: dict[str, WordScore]


def _tokens(text: str) -> list[tuple[str, int, int]]:
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


def candidate_phrases(text: str, params: RakeParams) -> list[CandidatePhrase]:
    """Maximal content-word runs between stopwords and punctuation, each
    truncated to ``params.max_phrase_words``."""
    phrases: list[CandidatePhrase] = []
    run: list[tuple[str, int, int]] = []

    def flush():
        if not run:
            return
        kept = run[: params.max_phrase_words]
        phrases.append(
            CandidatePhrase(
                words=tuple(word for word, _, _ in kept),
                start=kept[0][1],
                end=kept[-1][2],
            )
        )
        run.clear()

    prev_end: int | None = None
    for word, start, end in _tokens(text):
        gap = text[prev_end:start] if prev_end is not None else ""
        if gap.strip():  # punctuation between tokens ends the run
            flush()
        if word in params.stoplist:
            flush()
        else:
            run.append((word, start, end))
        prev_end = end
    flush()
    return phrases


def word_scores(phrases: Iterable[CandidatePhrase]) -> dict[str, WordScore]:
    """Score each word degree/freq; every occurrence contributes its phrase
    length to the degree."""
    freq: dict[str, int] = {}
    degree: dict[str, int] = {}
    for phrase in phrases:
        length = len(phrase.words)
        for word in phrase.words:
            freq[word] = freq.get(word, 0) + 1
            degree[word] = degree.get(word, 0) + length
    return {word: WordScore(freq=freq[word], degree=degree[word]) for word in freq}


def rake_extract(text: str, params: RakeParams) -> RakeExtraction:
    """Rank candidate phrases and select the top fraction.

    Phrase score is the sum of member word scores; ties rank the earlier
    span first. The automatic keyword words are the union of the selected
    phrases' words.
    """
    phrases = candidate_phrases(text, params)
    scores = word_scores(phrases)
    ranked = sorted(
        (
            ScoredPhrase(
                words=p.words,
                start=p.start,
                score=sum(scores[w].score for w in p.words),
            )
            for p in phrases
        ),
        key=lambda p: (-p.score, p.start),
    )
    count = math.ceil(params.keyword_fraction * len(ranked)) if ranked else 0
    selected = ranked[:count]
    auto_words: list[str] = []
    for phrase in selected:
        for word in phrase.words:
            if word not in auto_words:
                auto_words.append(word)
    return RakeExtraction(
        ranked=ranked, selected=selected, auto_words=auto_words, scores=scores
    )


def keyword_hash(active_words: Sequence[str]) -> str:
    """Hash of the active keywords in first-occurrence order."""
    joined = "\x1f".join(active_words)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


class KeywordSource(str, Enum):
    AUTO = "auto"
    MANUAL = "manual"


@dataclass
class KeywordEntry:
    word: str
    source: KeywordSource
    active: bool
    score: float


class KeywordSet:
    """Keyword state for one ramble: automatic entries plus manual toggles."""

    def __init__(self, entries: Iterable[KeywordEntry] | None = None):
        self._entries: dict[str, KeywordEntry] = {}
        for entry in entries or ():
            self._entries[entry.word] = entry

    def entries(self) -> list[KeywordEntry]:
        return list(self._entries.values())

    def get(self, word: str) -> KeywordEntry | None:
        return self._entries.get(word.lower())

    def recompute(self, text: str, params: RakeParams) -> None:
        """Refresh automatic keywords for ``text``.

        Manual entries survive with their active flag as long as their word
        still occurs in the text; a manual deactivation therefore keeps
        masking a re-extracted automatic keyword. Everything else is rebuilt.
        """
        extraction = rake_extract(text, params)
        present = {word for word, _, _ in _tokens(text)}
        manual = {
            word: entry
            for word, entry in self._entries.items()
            if entry.source is KeywordSource.MANUAL and word in present
        }
        rebuilt: dict[str, KeywordEntry] = {}
        for word in extraction.auto_words:
            if word in manual:
                continue
            score = extraction.scores[word].score if word in extraction.scores else 0.0
            rebuilt[word] = KeywordEntry(
                word=word, source=KeywordSource.AUTO, active=True, score=score
            )
        for word, entry in manual.items():
            score = (
                extraction.scores[word].score if word in extraction.scores else 0.0
            )
            rebuilt[word] = KeywordEntry(
                word=word, source=KeywordSource.MANUAL, active=entry.active, score=score
            )
        self._entries = self._order_by_occurrence(rebuilt, text)

    def toggle(self, text: str, word: str) -> KeywordEntry:
        """Flip a word's active flag, creating a manual entry if needed.

        Raises:
            BadRequestError: if the word does not occur in the text.
        """
        key = word.lower()
        present = {tok for tok, _, _ in _tokens(text)}
        if key not in present:
            raise BadRequestError(f"word not in text: {word!r}")
        entry = self._entries.get(key)
        if entry is None:
            entry = KeywordEntry(
                word=key, source=KeywordSource.MANUAL, active=True, score=0.0
            )
        else:
            entry = KeywordEntry(
                word=key,
                source=KeywordSource.MANUAL,
                active=not entry.active,
                score=entry.score,
            )
        rebuilt = dict(self._entries)
        rebuilt[key] = entry
        self._entries = self._order_by_occurrence(rebuilt, text)
        return entry

    def active_in_order(self, text: str) -> list[str]:
        """Active keyword words ordered by first occurrence in the text."""
        order = self._occurrence_order(text)
        active = [e.word for e in self._entries.values() if e.active]
        return sorted(active, key=lambda w: (order.get(w, math.inf), w))

    @staticmethod
    def _occurrence_order(text: str) -> dict[str, int]:
        order: dict[str, int] = {}
        for index, (word, _, _) in enumerate(_tokens(text)):
            order.setdefault(word, index)
        return order

    def _order_by_occurrence(
        self, entries: dict[str, KeywordEntry], text: str
    ) -> dict[str, KeywordEntry]:
        order = self._occurrence_order(text)
        return {
            word: entries[word]
            for word in sorted(entries, key=lambda w: (order.get(w, math.inf), w))
        }
