"""Document model: ordered rambles with raw capture history, keyword state,
cached summaries, and revision-counted mutations.

Every mutating operation validates first, applies under the document lock,
and bumps the revision by exactly one. Failed operations leave the document
untouched. Callers may be concurrent; the lock serializes writers.
"""

from __future__ import annotations

import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from ramblekit.cache import SummaryCache, utc_now_iso
from ramblekit.errors import (
    BadRequestError,
    InvalidStateError,
    NotFoundError,
    StaleSummaryError,
)
from ramblekit.keywords import (
    KeywordEntry,
    KeywordSet,
    KeywordSource,
    RakeParams,
    keyword_hash,
)
from ramblekit.textutil import text_hash
from ramblekit.zoom import ZoomLevel

# Raw capture history is bounded; the oldest entries are evicted first.
RAW_HISTORY_LIMIT = 50

Cleaner = Callable[[str], str]


def _new_id() -> str:
    return uuid.uuid4().hex


class RambleState(str, Enum):
    IDLE = "idle"
    RESPEAKING = "respeaking"
    EDITING = "editing"


class RespeakAction(str, Enum):
    APPEND = "append"
    REPLACE = "replace"
    DISCARD = "discard"


@dataclass
class RawCapture:
    text: str
    at: str  # ISO 8601 UTC


@dataclass(eq=False)
class Ramble:
    ramble_id: str
    text: str = ""
    raw_history: list[RawCapture] = field(default_factory=list)
    keywords: KeywordSet = field(default_factory=KeywordSet)
    summaries: SummaryCache = field(default_factory=SummaryCache)
    state: RambleState = RambleState.IDLE

    @property
    def content_hash(self) -> str:
        return text_hash(self.text)

    @property
    def keyword_hash(self) -> str:
        return keyword_hash(self.active_keywords())

    def active_keywords(self) -> list[str]:
        return self.keywords.active_in_order(self.text)


@dataclass
class RespeakSession:
    """One open respeak per ramble: the original text is frozen at begin."""

    ramble_id: str
    original_text: str
    new_text: str = ""


@dataclass(eq=False)
class RambleDocument:
    doc_id: str
    title: str = "Untitled"
    rambles: list[Ramble] = field(default_factory=list)
    revision: int = 0
    created_at: str = field(default_factory=utc_now_iso)
    updated_at: str = field(default_factory=utc_now_iso)
    rake_params: RakeParams = field(default_factory=RakeParams, repr=False)
    id_factory: Callable[[], str] = field(default=_new_id, repr=False)

    def __post_init__(self):
        self._lock = threading.RLock()
        self._sessions: dict[str, RespeakSession] = {}

    # -- lookup ------------------------------------------------------------

    def get_ramble(self, ramble_id: str) -> Ramble:
        for ramble in self.rambles:
            if ramble.ramble_id == ramble_id:
                return ramble
        raise NotFoundError(f"no such ramble: {ramble_id}")

    def index_of(self, ramble_id: str) -> int:
        for index, ramble in enumerate(self.rambles):
            if ramble.ramble_id == ramble_id:
                return index
        raise NotFoundError(f"no such ramble: {ramble_id}")

    def session_for(self, ramble_id: str) -> RespeakSession | None:
        with self._lock:
            return self._sessions.get(ramble_id)

    @contextmanager
    def locked(self):
        """Hold the document lock across a check-then-mutate sequence."""
        with self._lock:
            yield

    @contextmanager
    def _mutation(self):
        # validation happens inside the block before any state is touched;
        # the revision bumps only if the block finishes cleanly
        with self._lock:
            yield
            self.revision += 1
            self.updated_at = utc_now_iso()

    # -- creation and text commits ------------------------------------------

    def create_ramble(self, insert_index: int | None = None) -> Ramble:
        """Insert an empty idle ramble; by default it is appended.

        The text stays empty only until the first commit.
        """
        with self._mutation():
            if insert_index is None:
                insert_index = len(self.rambles)
            if not 0 <= insert_index <= len(self.rambles):
                raise BadRequestError(f"insert_index out of range: {insert_index}")
            ramble = Ramble(ramble_id=self.id_factory())
            self.rambles.insert(insert_index, ramble)
            return ramble

    def record_raw_capture(self, ramble_id: str, raw_text: str) -> Ramble:
        """Append raw dictation to the capture history without committing."""
        with self._mutation():
            ramble = self.get_ramble(ramble_id)
            if not raw_text:
                raise BadRequestError("raw_text must not be empty")
            self._push_raw(ramble, raw_text)
            return ramble

    def commit_text(
        self, ramble_id: str, text: str, raw_capture: str | None = None
    ) -> Ramble:
        """Replace a ramble's text and refresh derived state.

        Summaries cached for a different content hash are flagged stale and
        keywords are recomputed (manual toggles survive where their word
        does). Committing the same text twice leaves the caches servable.

        Raises:
            InvalidStateError: while the ramble is being respoken.
            BadRequestError: on empty text.
        """
        with self._mutation():
            ramble = self.get_ramble(ramble_id)
            if ramble.state is RambleState.RESPEAKING:
                raise InvalidStateError("ramble is being respoken")
            self._apply_text(ramble, text, raw_capture)
            return ramble

    def _apply_text(self, ramble: Ramble, text: str, raw_capture: str | None) -> None:
        if not text.strip():
            raise BadRequestError("text must not be empty")
        if raw_capture:
            self._push_raw(ramble, raw_capture)
        ramble.text = text
        ramble.summaries.mark_stale_for_content(ramble.content_hash)
        ramble.keywords.recompute(ramble.text, self.rake_params)

    @staticmethod
    def _push_raw(ramble: Ramble, raw_text: str) -> None:
        ramble.raw_history.append(RawCapture(text=raw_text, at=utc_now_iso()))
        overflow = len(ramble.raw_history) - RAW_HISTORY_LIMIT
        if overflow > 0:
            del ramble.raw_history[:overflow]

    # -- structural operations ----------------------------------------------

    def manual_split(self, ramble_id: str, boundary: int) -> tuple[Ramble, Ramble]:
        """Split at a character boundary; the left part keeps the id.

        Both sides are trimmed. A boundary that would leave either side
        empty is rejected.
        """
        with self._mutation():
            index = self.index_of(ramble_id)
            ramble = self.rambles[index]
            if ramble.state is RambleState.RESPEAKING:
                raise InvalidStateError("ramble is being respoken")
            if not 0 < boundary < len(ramble.text):
                raise BadRequestError(f"boundary out of range: {boundary}")
            left_text = ramble.text[:boundary].strip()
            right_text = ramble.text[boundary:].strip()
            if not left_text or not right_text:
                raise BadRequestError("split would create an empty ramble")
            right = Ramble(ramble_id=self.id_factory())
            self._inherit(right, ramble, right_text)
            self._inherit(ramble, ramble, left_text)
            self.rambles.insert(index + 1, right)
            return ramble, right

    def replace_with_parts(self, ramble_id: str, parts: list[str]) -> list[Ramble]:
        """Replace one ramble with several at its position (semantic split).

        The first part keeps the original id; each part inherits manual
        keyword toggles for words it still contains.
        """
        with self._mutation():
            index = self.index_of(ramble_id)
            ramble = self.rambles[index]
            if ramble.state is RambleState.RESPEAKING:
                raise InvalidStateError("ramble is being respoken")
            if len(parts) < 2 or any(not p.strip() for p in parts):
                raise BadRequestError("split needs at least two non-empty parts")
            new_rambles = [ramble]
            for _ in parts[1:]:
                new_rambles.append(Ramble(ramble_id=self.id_factory()))
            # seed manual toggles before rewriting the original's text
            for target, text in list(zip(new_rambles, parts))[::-1]:
                self._inherit(target, ramble, text.strip())
            self.rambles[index : index + 1] = new_rambles
            return new_rambles

    def manual_merge(self, target_id: str, source_id: str) -> Ramble:
        """Concatenate source onto target; target keeps its id and position."""
        with self._mutation():
            if target_id == source_id:
                raise BadRequestError("cannot merge a ramble with itself")
            target = self.get_ramble(target_id)
            source = self.get_ramble(source_id)
            for ramble in (target, source):
                if ramble.state is RambleState.RESPEAKING:
                    raise InvalidStateError("ramble is being respoken")
            merged_text = f"{target.text} {source.text}"
            self._inherit(target, source, merged_text)
            self.rambles.remove(source)
            return target

    def merge_rambles(self, ramble_ids: list[str], merged_text: str) -> Ramble:
        """Replace several rambles with one holding ``merged_text`` (semantic
        merge); the survivor keeps the first id and position."""
        with self._mutation():
            if len(ramble_ids) < 2:
                raise BadRequestError("merge needs at least two rambles")
            if len(set(ramble_ids)) != len(ramble_ids):
                raise BadRequestError("duplicate ramble ids")
            rambles = [self.get_ramble(rid) for rid in ramble_ids]
            for ramble in rambles:
                if ramble.state is RambleState.RESPEAKING:
                    raise InvalidStateError("ramble is being respoken")
            survivor = rambles[0]
            for other in rambles[1:]:
                self._adopt_manual(survivor, other)
            self._inherit(survivor, survivor, merged_text)
            for other in rambles[1:]:
                self.rambles.remove(other)
            return survivor

    def reorder(self, ramble_id: str, new_index: int) -> None:
        """Move a ramble; removal-then-insert semantics. A move to its own
        position still counts as a mutation."""
        with self._mutation():
            index = self.index_of(ramble_id)
            if not 0 <= new_index < len(self.rambles):
                raise BadRequestError(f"new_index out of range: {new_index}")
            ramble = self.rambles.pop(index)
            self.rambles.insert(new_index, ramble)

    def delete_ramble(self, ramble_id: str) -> None:
        with self._mutation():
            ramble = self.get_ramble(ramble_id)
            if ramble.state is RambleState.RESPEAKING:
                raise InvalidStateError("ramble is being respoken")
            self.rambles.remove(ramble)
            self._sessions.pop(ramble_id, None)

    def _inherit(self, target: Ramble, source: Ramble, text: str) -> None:
        """Give ``target`` new text, carrying over manual keyword toggles
        from ``source`` for words that still occur. The target's own entries
        win on conflicts."""
        if target is not source:
            self._adopt_manual(target, source)
        target.text = text
        target.summaries.mark_stale_for_content(target.content_hash)
        target.keywords.recompute(target.text, self.rake_params)

    @staticmethod
    def _adopt_manual(target: Ramble, source: Ramble) -> None:
        existing = {e.word for e in target.keywords.entries()}
        adopted = target.keywords.entries()
        for entry in source.keywords.entries():
            if entry.source is KeywordSource.MANUAL and entry.word not in existing:
                adopted.append(
                    KeywordEntry(
                        word=entry.word,
                        source=KeywordSource.MANUAL,
                        active=entry.active,
                        score=entry.score,
                    )
                )
        target.keywords = KeywordSet(adopted)

    # -- respeaking ----------------------------------------------------------

    def respeak_begin(self, ramble_id: str) -> RespeakSession:
        """Open a respeak session; the original text is frozen in it."""
        with self._mutation():
            ramble = self.get_ramble(ramble_id)
            if ramble.state is not RambleState.IDLE:
                raise InvalidStateError(f"ramble is {ramble.state.value}")
            if ramble_id in self._sessions:
                raise InvalidStateError("a respeak session is already open")
            session = RespeakSession(ramble_id=ramble_id, original_text=ramble.text)
            self._sessions[ramble_id] = session
            ramble.state = RambleState.RESPEAKING
            return session

    def respeak_commit(
        self,
        ramble_id: str,
        action: RespeakAction,
        cleaner: Cleaner | None = None,
        new_text: str | None = None,
    ) -> Ramble:
        """Close a respeak session.

        APPEND cleans original + " " + new text; REPLACE cleans the new text
        alone; DISCARD restores the original exactly, with no side effects on
        hashes, keywords, or caches. Cleaning failures leave the session open.

        Args:
            cleaner: required for APPEND and REPLACE.
            new_text: replaces the session buffer before committing.
        """
        with self._lock:
            ramble = self.get_ramble(ramble_id)
            session = self._sessions.get(ramble_id)
            if ramble.state is not RambleState.RESPEAKING or session is None:
                raise InvalidStateError("no open respeak session")
            if new_text is not None:
                session.new_text = new_text
            if action is RespeakAction.DISCARD:
                with self._mutation():
                    ramble.state = RambleState.IDLE
                    del self._sessions[ramble_id]
                return ramble
            if cleaner is None:
                raise BadRequestError("append and replace require a cleaner")
            if action is RespeakAction.APPEND:
                combined = f"{session.original_text} {session.new_text}".strip()
            elif action is RespeakAction.REPLACE:
                combined = session.new_text
            else:
                raise BadRequestError(f"unknown respeak action: {action!r}")
            if not combined.strip():
                raise BadRequestError("nothing was respoken")
            cleaned = cleaner(combined)  # may raise BackendError; session stays open
            with self._mutation():
                ramble.state = RambleState.IDLE
                del self._sessions[ramble_id]
                self._apply_text(ramble, cleaned, raw_capture=session.new_text or None)
            return ramble

    # -- keywords -------------------------------------------------------------

    def toggle_keyword(self, ramble_id: str, word: str) -> Ramble:
        with self._mutation():
            ramble = self.get_ramble(ramble_id)
            ramble.keywords.toggle(ramble.text, word)
            return ramble

    # -- export ----------------------------------------------------------------

    def export(self, level: ZoomLevel) -> str:
        """Join all rambles at a zoom level with blank lines.

        FULL joins the texts themselves. Other levels require a servable
        cached summary for every ramble.

        Raises:
            StaleSummaryError: listing the rambles with no servable entry.
        """
        with self._lock:
            if level is ZoomLevel.FULL:
                return "\n\n".join(r.text for r in self.rambles)
            pieces = []
            missing = []
            for ramble in self.rambles:
                entry = ramble.summaries.fresh(
                    ramble.content_hash, ramble.keyword_hash, level
                )
                if entry is None:
                    missing.append(ramble.ramble_id)
                else:
                    pieces.append(entry.text)
            if missing:
                raise StaleSummaryError(level.value, missing)
            return "\n\n".join(pieces)


def new_document(
    doc_id: str | None = None,
    title: str = "Untitled",
    rake_params: RakeParams | None = None,
    id_factory: Callable[[], str] | None = None,
) -> RambleDocument:
    """Create an empty document at revision 0."""
    return RambleDocument(
        doc_id=doc_id or _new_id(),
        title=title,
        rake_params=rake_params or RakeParams(),
        id_factory=id_factory or _new_id,
    )
