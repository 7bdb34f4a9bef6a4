"""Generation orchestration: cleaning, summaries, semantic split and merge,
custom transforms.

Summaries stream through a single-flight broker: at most one generation per
(content hash, keyword hash, level) key is in flight, later subscribers
attach to it, and results land in the ramble's cache unless the text moved
on mid-generation (the stale guard discards them).
"""

from __future__ import annotations

import json
import logging
import re
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from ramblekit.backends import GenerationRequest, GistBackend
from ramblekit.cache import SummaryEntry
from ramblekit.document import Ramble
from ramblekit.errors import BackendError, BadRequestError
from ramblekit.keywords import RakeParams
from ramblekit.prompts import PromptKind, render_prompt
from ramblekit.textutil import text_hash, word_count
from ramblekit.zoom import SUMMARY_LEVELS, ZoomLevel, word_budget

logger = logging.getLogger(__name__)

# A summary may drift past its budget on live models; past this ratio the
# overrun is recorded as a soft-contract violation.
_SOFT_BUDGET_RATIO = 1.5

_REPAIR_INSTRUCTION = "return only the JSON array"

StreamEvent = tuple[str, str]  # ("chunk", delta) or ("done", text)

CacheKey = tuple[str, str, ZoomLevel]


class _Flight:
    """One in-flight generation with replayable chunks for late subscribers."""

    def __init__(self):
        self._cond = threading.Condition()
        self._chunks: list[str] = []
        self._done = False
        self._error: Exception | None = None
        self._text: str | None = None

    def publish(self, chunk: str) -> None:
        with self._cond:
            self._chunks.append(chunk)
            self._cond.notify_all()

    def finish(self, text: str) -> None:
        with self._cond:
            self._done = True
            self._text = text
            self._cond.notify_all()

    def fail(self, error: Exception) -> None:
        with self._cond:
            self._done = True
            self._error = error
            self._cond.notify_all()

    def subscribe(self) -> Iterator[StreamEvent]:
        index = 0
        while True:
            with self._cond:
                while index >= len(self._chunks) and not self._done:
                    self._cond.wait()
                fresh = self._chunks[index:]
                index += len(fresh)
                finished = self._done and index >= len(self._chunks)
                error = self._error
                text = self._text
            for chunk in fresh:
                yield ("chunk", chunk)
            if finished:
                if error is not None:
                    raise error
                yield ("done", text or "")
                return


@dataclass
class LevelResult:
    ok: bool
    text: str | None = None
    error: str | None = None


class PregenerateHandle:
    """Tracks the three background summary generations for one ramble."""

    def __init__(self, futures: dict[ZoomLevel, Future]):
        self._futures = futures

    def wait(self, timeout: float | None = None) -> dict[ZoomLevel, LevelResult]:
        """Block until every level resolves; failures are isolated per level."""
        results: dict[ZoomLevel, LevelResult] = {}
        for level, future in self._futures.items():
            try:
                results[level] = LevelResult(ok=True, text=future.result(timeout))
            except Exception as exc:
                results[level] = LevelResult(ok=False, error=str(exc))
        return results

    def done(self) -> bool:
        return all(f.done() for f in self._futures.values())


class GistEngine:
    """Drives a generation backend for every operation the document needs."""

    def __init__(
        self,
        backend: GistBackend,
        rake_params: RakeParams | None = None,
        max_workers: int = 8,
    ):
        self.backend = backend
        self.rake_params = rake_params or RakeParams()
        self.soft_check_reports: list[str] = []
        self._lock = threading.Lock()
        self._flights: dict[CacheKey, _Flight] = {}
        self._clean_memo: dict[str, str] = {}
        self._executor = ThreadPoolExecutor(
            max_workers=max_workers, thread_name_prefix="gist"
        )

    # -- cleaning --------------------------------------------------------

    def clean_transcript(self, raw_text: str) -> str:
        """Clean raw dictation into committed prose.

        Results are memoized by raw-text hash, so re-finalizing unchanged
        dictation costs no backend call. One retry on backend failure; the
        raw text is never modified.
        """
        if not raw_text.strip():
            raise BadRequestError("raw_text must not be empty")
        memo_key = text_hash(raw_text)
        with self._lock:
            cached = self._clean_memo.get(memo_key)
        if cached is not None:
            return cached
        request = GenerationRequest(
            kind=PromptKind.CLEAN,
            messages=render_prompt(PromptKind.CLEAN, text=raw_text),
            texts=(raw_text,),
        )
        cleaned = self._generate_with_retry(request, "clean")
        with self._lock:
            self._clean_memo[memo_key] = cleaned
        return cleaned

    # -- summaries ---------------------------------------------------------

    def stream_summary(self, ramble: Ramble, level: ZoomLevel) -> Iterator[StreamEvent]:
        """Stream a summary for the ramble's current text and keywords.

        A servable cache entry produces a single ("done", text) event. An
        in-flight generation for the same key is joined, replaying chunks
        already produced; otherwise a new generation starts.
        """
        if level not in SUMMARY_LEVELS:
            raise BadRequestError(f"no summaries at level: {level.value}")
        text = ramble.text
        if not text.strip():
            raise BadRequestError("ramble has no text to summarize")
        key: CacheKey = (ramble.content_hash, ramble.keyword_hash, level)
        with self._lock:
            entry = ramble.summaries.fresh(*key)
            if entry is not None:
                return self._single_done(entry.text)
            flight = self._flights.get(key)
            if flight is None:
                active = tuple(ramble.active_keywords())
                request = self._summary_request(text, active, level)
                flight = _Flight()
                self._flights[key] = flight
                threading.Thread(
                    target=self._produce_summary,
                    args=(flight, request, ramble, key),
                    name=f"summary-{level.value}",
                    daemon=True,
                ).start()
        return flight.subscribe()

    def summarize(self, ramble: Ramble, level: ZoomLevel) -> str:
        """Blocking summary; the cached or freshly generated final text."""
        final = ""
        for event, payload in self.stream_summary(ramble, level):
            if event == "done":
                final = payload
        return final

    def pregenerate(self, ramble: Ramble) -> PregenerateHandle:
        """Kick off all three summary levels in parallel."""
        futures = {
            level: self._executor.submit(self.summarize, ramble, level)
            for level in SUMMARY_LEVELS
        }
        return PregenerateHandle(futures)

    @staticmethod
    def _single_done(text: str) -> Iterator[StreamEvent]:
        yield ("done", text)

    def _summary_request(
        self, text: str, keywords: tuple[str, ...], level: ZoomLevel
    ) -> GenerationRequest:
        return GenerationRequest(
            kind=PromptKind.SUMMARIZE,
            messages=render_prompt(
                PromptKind.SUMMARIZE, text=text, keywords=keywords, level=level
            ),
            texts=(text,),
            keywords=keywords,
            level=level,
            budget=word_budget(level, word_count(text)),
        )

    def _produce_summary(
        self,
        flight: _Flight,
        request: GenerationRequest,
        ramble: Ramble,
        key: CacheKey,
    ) -> None:
        try:
            parts: list[str] = []
            for chunk in self.backend.generate(request):
                parts.append(chunk)
                flight.publish(chunk)
            text = "".join(parts)
            self._soft_check_summary(text, request)
            content_hash, keyword_hash, level = key
            # stale guard: only cache if the ramble still matches the key
            if (
                ramble.content_hash == content_hash
                and ramble.keyword_hash == keyword_hash
            ):
                ramble.summaries.put(
                    SummaryEntry(
                        level=level,
                        text=text,
                        content_hash=content_hash,
                        keyword_hash=keyword_hash,
                    )
                )
            else:
                logger.info("discarding %s summary for superseded text", level.value)
            with self._lock:
                self._flights.pop(key, None)
            flight.finish(text)
        except Exception as exc:
            with self._lock:
                self._flights.pop(key, None)
            flight.fail(
                exc
                if isinstance(exc, (BackendError, BadRequestError))
                else BackendError(str(exc))
            )

    def _soft_check_summary(self, text: str, request: GenerationRequest) -> None:
        if request.budget and word_count(text) > _SOFT_BUDGET_RATIO * request.budget:
            report = (
                f"summary of {word_count(text)} words exceeds "
                f"{_SOFT_BUDGET_RATIO}x budget {request.budget}"
            )
            logger.warning(report)
            self.soft_check_reports.append(report)

    # -- structure ------------------------------------------------------------

    def semantic_split(self, text: str) -> list[str]:
        """Ask the backend to split text into parts.

        The response must parse as a JSON array of at least two non-empty
        strings. A malformed response triggers one repair round that replays
        the bad output and asks for only the array; a second failure is a
        hard error.
        """
        if not text.strip():
            raise BadRequestError("text must not be empty")
        messages = render_prompt(PromptKind.SEMANTIC_SPLIT, text=text)
        request = GenerationRequest(
            kind=PromptKind.SEMANTIC_SPLIT, messages=messages, texts=(text,)
        )
        raw = self._drain(request)
        try:
            return _parse_parts(raw)
        except ValueError:
            logger.warning("split response failed to parse; repairing")
        repair = GenerationRequest(
            kind=PromptKind.SEMANTIC_SPLIT,
            messages=messages + (("assistant", raw), ("user", _REPAIR_INSTRUCTION)),
            texts=(text,),
        )
        repaired = self._drain(repair)
        try:
            return _parse_parts(repaired)
        except ValueError as exc:
            raise BackendError(f"split response was not a JSON array: {exc}") from exc

    def semantic_merge(self, texts: Sequence[str], keywords: Sequence[str] = ()) -> str:
        """Merge texts into one paragraph. One retry on backend failure;
        missing keywords are recorded as soft-contract violations."""
        if len(texts) < 2:
            raise BadRequestError("merging needs at least two texts")
        if any(not t.strip() for t in texts):
            raise BadRequestError("cannot merge empty text")
        request = GenerationRequest(
            kind=PromptKind.SEMANTIC_MERGE,
            messages=render_prompt(
                PromptKind.SEMANTIC_MERGE, texts=texts, keywords=keywords
            ),
            texts=tuple(texts),
            keywords=tuple(keywords),
        )
        merged = self._generate_with_retry(request, "merge")
        lowered = merged.lower()
        for keyword in keywords:
            if keyword.lower() not in lowered:
                report = f"merged text lost keyword {keyword!r}"
                logger.warning(report)
                self.soft_check_reports.append(report)
        return merged

    def custom_transform(
        self,
        text: str,
        user_prompt: str,
        keywords: Sequence[str] = (),
        include_keywords: bool = False,
    ) -> str:
        """Run a user-authored transform; the result is a candidate only."""
        request = GenerationRequest(
            kind=PromptKind.CUSTOM_TRANSFORM,
            messages=render_prompt(
                PromptKind.CUSTOM_TRANSFORM,
                text=text,
                user_prompt=user_prompt,
                keywords=keywords,
                include_keywords=include_keywords,
            ),
            texts=(text,),
            keywords=tuple(keywords),
            user_prompt=user_prompt,
        )
        return self._drain(request)

    # -- plumbing ---------------------------------------------------------------

    def _drain(self, request: GenerationRequest) -> str:
        return "".join(self.backend.generate(request))

    def _generate_with_retry(self, request: GenerationRequest, label: str) -> str:
        last: BackendError | None = None
        for _ in range(2):
            try:
                return self._drain(request)
            except BackendError as exc:
                last = exc
        raise BackendError(f"{label} failed after retry: {last}") from last


_FENCE = re.compile(r"^```[a-zA-Z]*\n|\n?```$")


def _parse_parts(raw: str) -> list[str]:
    """Parse a JSON array of part strings; tolerate code fences and
    surrounding prose, nothing else."""
    candidate = _FENCE.sub("", raw.strip()).strip()
    parts = None
    try:
        parts = json.loads(candidate)
    except json.JSONDecodeError:
        start, end = candidate.find("["), candidate.rfind("]")
        if start != -1 and end > start:
            try:
                parts = json.loads(candidate[start : end + 1])
            except json.JSONDecodeError:
                parts = None
    if not isinstance(parts, list) or len(parts) < 2:
        raise ValueError("expected a JSON array of at least two strings")
    if not all(isinstance(p, str) and p.strip() for p in parts):
        raise ValueError("every part must be a non-empty string")
    return parts
