"""Dictation transport: transcript event streams and capture.

Real speech recognizers emit partial hypotheses that are later superseded by
finals. Only finals enter the captured text; partials exist for live display
and are forwarded to a callback. A scripted source replays prepared
utterances with the same event shape, so every consumer can be exercised
without audio.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator

from ramblekit.errors import BadRequestError


class TranscriptEventKind(Enum):
    PARTIAL = "partial"
    FINAL = "final"
    END_OF_STREAM = "end"


@dataclass(frozen=True)
class TranscriptEvent:
    kind: TranscriptEventKind
    text: str = ""


@dataclass
class DictationResult:
    """What a dictation pass produced. ``error`` is set when the stream died
    mid-way; the text holds everything finalized before that."""

    text: str
    error: str | None = None


class ScriptedSource:
    """Replays utterances as a recognizer would: growing word-prefix
    partials, then one final per utterance, then end of stream."""

    def __init__(self, utterances: Iterable[str], include_partials: bool = True):
        self.utterances = [u.strip() for u in utterances if u.strip()]
        self.include_partials = include_partials

    def events(self) -> Iterator[TranscriptEvent]:
        for utterance in self.utterances:
            words = utterance.split()
            if self.include_partials:
                for end in range(1, len(words) + 1):
                    yield TranscriptEvent(
                        TranscriptEventKind.PARTIAL, " ".join(words[:end])
                    )
            yield TranscriptEvent(TranscriptEventKind.FINAL, " ".join(words))
        yield TranscriptEvent(TranscriptEventKind.END_OF_STREAM)


class JsonMessageSource:
    """Adapts a stream of JSON text messages to transcript events.

    Each message is an object like {"type": "partial", "text": "..."}; the
    accepted types are partial, final, and end.
    """

    _KINDS = {
        "partial": TranscriptEventKind.PARTIAL,
        "final": TranscriptEventKind.FINAL,
        "end": TranscriptEventKind.END_OF_STREAM,
    }

    def __init__(self, messages: Iterable[str]):
        self.messages = messages

    def events(self) -> Iterator[TranscriptEvent]:
        for message in self.messages:
            try:
                payload = json.loads(message)
            except json.JSONDecodeError as exc:
                raise BadRequestError(f"malformed transcript message: {exc}") from exc
            kind = self._KINDS.get(payload.get("type"))
            if kind is None:
                raise BadRequestError(
                    f"unknown transcript message type: {payload.get('type')!r}"
                )
            yield TranscriptEvent(kind, payload.get("text", ""))


def run_dictation(
    source, on_partial: Callable[[str], None] | None = None
) -> DictationResult:
    """Drain a transcript source into captured text.

    Finals are joined with single spaces; partials only feed ``on_partial``.
    A source failure mid-stream is not fatal: whatever was finalized so far
    comes back along with the error text.
    """
    finals: list[str] = []
    try:
        for event in source.events():
            if event.kind is TranscriptEventKind.PARTIAL:
                if on_partial is not None:
                    on_partial(event.text)
            elif event.kind is TranscriptEventKind.FINAL:
                if event.text.strip():
                    finals.append(event.text.strip())
            else:
                break
    except Exception as exc:
        return DictationResult(text=" ".join(finals), error=str(exc))
    return DictationResult(text=" ".join(finals))


def load_script(path: str | Path) -> list[str]:
    """Read a dictation script: one utterance per line, blanks skipped."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [line.strip() for line in lines if line.strip()]
