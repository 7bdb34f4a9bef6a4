"""Generation backends.

All backends expose the same contract: ``generate(request)`` returns an
ordered stream of text chunks whose concatenation is the final output. The
offline backend is fully deterministic and rule-based so the whole system
can run and be tested without a model; the replay backend serves canned
responses keyed by prompt digest; the remote backend speaks the
chat-completions streaming protocol.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Protocol, Sequence, runtime_checkable

import httpx

from ramblekit.errors import BackendError
from ramblekit.keywords import RakeParams, candidate_phrases, word_scores
from ramblekit.prompts import Message, PromptKind
from ramblekit.textutil import normalize_whitespace, split_sentences, word_count
from ramblekit.zoom import ZoomLevel

logger = logging.getLogger(__name__)

# Streamed output is cut into fixed-size slices; concatenation is exact.
_CHUNK_CHARS = 32

API_KEY_VAR = "RAMBLEKIT_API_KEY"
BASE_URL_VAR = "RAMBLEKIT_BASE_URL"
MODEL_VAR = "RAMBLEKIT_MODEL"

_DEFAULT_BASE_URL = "https://api.openai.com/v1"
_DEFAULT_MODEL = "gpt-4"

_REMOTE_TEMPERATURE = 0.3
_REMOTE_TIMEOUT_SECONDS = 60.0

# Splitting aims for one part per ~120 words, within [2, 5] parts.
_SPLIT_WORDS_PER_PART = 120
_SPLIT_MIN_PARTS = 2
_SPLIT_MAX_PARTS = 5


@dataclass(frozen=True)
class GenerationRequest:
    """One generation call: the rendered messages plus the structured inputs
    they were rendered from, so rule-based backends can skip the prose."""

    kind: PromptKind
    messages: tuple[Message, ...]
    texts: tuple[str, ...] = ()
    keywords: tuple[str, ...] = ()
    level: ZoomLevel | None = None
    budget: int | None = None
    user_prompt: str | None = None


@runtime_checkable
class GistBackend(Protocol):
    name: str

    def generate(self, request: GenerationRequest) -> Iterator[str]:
        """Yield output chunks in order; their concatenation is the result."""
        ...


def prompt_digest(messages: Sequence[Message]) -> str:
    """Stable digest of rendered messages, used to key replay fixtures."""
    canonical = json.dumps(
        [[role, content] for role, content in messages],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _chunked(text: str) -> Iterator[str]:
    for start in range(0, len(text), _CHUNK_CHARS):
        yield text[start : start + _CHUNK_CHARS]


# ---------------------------------------------------------------------------
# Offline rules
# ---------------------------------------------------------------------------


def clean_rules(text: str) -> str:
    """Deterministic transcript cleanup: collapse whitespace, capitalize
    sentence starts, and close with terminal punctuation. The alphanumeric
    token sequence is preserved case-insensitively."""
    normalized = normalize_whitespace(text)
    if not normalized:
        return normalized
    pieces = []
    for piece in split_sentences(normalized, require_case=False):
        if piece[0].isalpha():
            piece = piece[0].upper() + piece[1:]
        pieces.append(piece)
    cleaned = " ".join(pieces)
    if cleaned[-1] not in ".!?":
        cleaned += "."
    return cleaned


def extract_summary(
    text: str, keywords: Sequence[str], budget: int, params: RakeParams | None = None
) -> str:
    """Extractive summary within ``budget`` words.

    Sentences are ranked by active-keyword occurrences, then by summed word
    scores, then by position; they are taken greedily in rank order, the
    overflowing sentence is truncated to the remaining budget, and the
    selection is emitted in original text order.
    """
    params = params or RakeParams()
    sentences = split_sentences(text)
    if not sentences:
        return ""
    scores = word_scores(candidate_phrases(text, params))
    keyword_set = {k.lower() for k in keywords}
    token_pattern = re.compile(r"\w+(?:[-']\w+)*")

    def metrics(sentence: str) -> tuple[int, float]:
        tokens = [t.lower() for t in token_pattern.findall(sentence)]
        kw_hits = sum(1 for t in tokens if t in keyword_set)
        weight = sum(scores[t].score for t in tokens if t in scores)
        return kw_hits, weight

    ranked = sorted(
        range(len(sentences)),
        key=lambda i: (-metrics(sentences[i])[0], -metrics(sentences[i])[1], i),
    )
    def has_keyword(chunk: str) -> bool:
        return any(t.lower() in keyword_set for t in token_pattern.findall(chunk))

    remaining = budget
    chosen: list[tuple[int, str]] = []
    for index in ranked:
        if remaining <= 0:
            break
        words = sentences[index].split()
        if len(words) <= remaining:
            chosen.append((index, sentences[index]))
            remaining -= len(words)
        else:
            start = 0
            # keep an anchor keyword visible even in a hard truncation
            if not any(has_keyword(piece) for _, piece in chosen):
                for pos, word in enumerate(words):
                    if has_keyword(word):
                        start = max(0, pos - remaining + 1)
                        break
            chosen.append((index, " ".join(words[start : start + remaining])))
            remaining = 0
            break
    return " ".join(piece for _, piece in sorted(chosen))


def split_parts(text: str) -> list[str]:
    """Partition text at sentence boundaries into 2..5 parts with greedily
    balanced word counts. Joining the parts with single spaces reproduces
    the whitespace-normalized input.

    Raises:
        BackendError: when the text has fewer than two sentences.
    """
    sentences = split_sentences(text)
    if len(sentences) < 2:
        raise BackendError("text has a single sentence; nothing to split")
    total = sum(word_count(s) for s in sentences)
    n = max(_SPLIT_MIN_PARTS, min(_SPLIT_MAX_PARTS, math.ceil(total / _SPLIT_WORDS_PER_PART)))
    n = min(n, len(sentences))
    parts: list[str] = []
    index = 0
    remaining_words = total
    for part_no in range(n):
        parts_left = n - part_no
        if parts_left == 1:
            chunk = sentences[index:]
        else:
            target = remaining_words / parts_left
            # leave at least one sentence for every later part
            max_take = len(sentences) - index - (parts_left - 1)
            taken = 0
            words = 0
            while taken < max_take:
                words += word_count(sentences[index + taken])
                taken += 1
                if words >= target:
                    break
            chunk = sentences[index : index + max(taken, 1)]
        index += len(chunk)
        remaining_words -= sum(word_count(s) for s in chunk)
        parts.append(" ".join(chunk))
    return parts


def merge_texts(texts: Sequence[str]) -> str:
    """Concatenate texts in order, dropping exact-duplicate sentences after
    their first occurrence."""
    seen: set[str] = set()
    kept: list[str] = []
    for text in texts:
        for sentence in split_sentences(text):
            if sentence not in seen:
                seen.add(sentence)
                kept.append(sentence)
    return " ".join(kept)


class OfflineBackend:
    """Deterministic rule-based backend; no model, no network."""

    name = "offline"

    def __init__(self, rake_params: RakeParams | None = None):
        self._params = rake_params or RakeParams()

    def generate(self, request: GenerationRequest) -> Iterator[str]:
        kind = request.kind
        if kind is PromptKind.CLEAN:
            output = clean_rules(request.texts[0])
        elif kind is PromptKind.SUMMARIZE:
            if request.budget is None:
                raise BackendError("summary request is missing a budget")
            output = extract_summary(
                request.texts[0], request.keywords, request.budget, self._params
            )
        elif kind is PromptKind.SEMANTIC_SPLIT:
            output = json.dumps(split_parts(request.texts[0]), ensure_ascii=False)
        elif kind is PromptKind.SEMANTIC_MERGE:
            output = merge_texts(request.texts)
        elif kind is PromptKind.CUSTOM_TRANSFORM:
            output = request.texts[0]  # a transform no model can improvise
        else:
            raise BackendError(f"unsupported prompt kind: {kind!r}")
        yield from _chunked(output)


class ReplayBackend:
    """Serves canned responses from a fixture directory.

    Each fixture file is named ``<prompt digest>.txt`` and holds the exact
    response; a single trailing newline is tolerated and stripped.
    """

    name = "replay"

    def __init__(self, fixture_dir: str | Path):
        self._dir = Path(fixture_dir)

    def generate(self, request: GenerationRequest) -> Iterator[str]:
        digest = prompt_digest(request.messages)
        path = self._dir / f"{digest}.txt"
        if not path.is_file():
            raise BackendError(
                f"no replay fixture {digest} for a {request.kind.value} prompt"
            )
        text = path.read_text(encoding="utf-8")
        if text.endswith("\n"):
            text = text[:-1]
        yield from _chunked(text)


class RemoteBackend:
    """Chat-completions streaming client.

    Configured from the environment unless overridden: RAMBLEKIT_API_KEY,
    RAMBLEKIT_BASE_URL, RAMBLEKIT_MODEL. Transport errors before the first
    chunk are retried once; a failure mid-stream is surfaced immediately
    because chunks were already delivered.
    """

    def __init__(
        self,
        api_key: str | None = None,
        base_url: str | None = None,
        model: str | None = None,
        timeout: float = _REMOTE_TIMEOUT_SECONDS,
        transport: httpx.BaseTransport | None = None,
    ):
        self._api_key = api_key or os.environ.get(API_KEY_VAR, "")
        self._base_url = (
            base_url or os.environ.get(BASE_URL_VAR) or _DEFAULT_BASE_URL
        ).rstrip("/")
        self._model = model or os.environ.get(MODEL_VAR) or _DEFAULT_MODEL
        self._timeout = timeout
        self._transport = transport
        self.name = f"remote:{self._model}"

    def generate(self, request: GenerationRequest) -> Iterator[str]:
        for attempt in (1, 2):
            yielded = False
            try:
                for chunk in self._stream(request):
                    yielded = True
                    yield chunk
                return
            except httpx.HTTPError as exc:
                if yielded or attempt == 2:
                    raise BackendError(f"remote generation failed: {exc}") from exc
                logger.warning("remote call failed, retrying once: %s", exc)

    def _stream(self, request: GenerationRequest) -> Iterator[str]:
        payload = {
            "model": self._model,
            "messages": [
                {"role": role, "content": content}
                for role, content in request.messages
            ],
            "temperature": _REMOTE_TEMPERATURE,
            "stream": True,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        client = httpx.Client(
            timeout=self._timeout,
            transport=self._transport,
        )
        try:
            with client.stream(
                "POST",
                f"{self._base_url}/chat/completions",
                json=payload,
                headers=headers,
            ) as response:
                response.raise_for_status()
                for line in response.iter_lines():
                    if not line.startswith("data:"):
                        continue
                    data = line[len("data:") :].strip()
                    if data == "[DONE]":
                        break
                    try:
                        event = json.loads(data)
                    except json.JSONDecodeError:
                        continue  # keepalives and vendor noise
                    choices = event.get("choices") or []
                    if not choices:
                        continue
                    delta = (choices[0].get("delta") or {}).get("content")
                    if delta:
                        yield delta
        finally:
            client.close()
