"""Per-ramble summary cache.

Entries are keyed by (content_hash, keyword_hash, level). An entry is
servable only when its key matches the ramble's current hashes and it has
not been flagged stale; superseded entries are kept but never served.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from ramblekit.zoom import ZoomLevel


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class SummaryEntry:
    level: ZoomLevel
    text: str
    content_hash: str
    keyword_hash: str
    stale: bool = False
    created_at: str = ""


CacheKey = tuple[str, str, ZoomLevel]


class SummaryCache:
    """Thread-safe summary store; writes are atomic per key."""

    def __init__(self, entries: list[SummaryEntry] | None = None):
        self._lock = threading.Lock()
        self._entries: dict[CacheKey, SummaryEntry] = {}
        for entry in entries or ():
            self._entries[(entry.content_hash, entry.keyword_hash, entry.level)] = entry

    def put(self, entry: SummaryEntry) -> None:
        if not entry.created_at:
            entry = replace(entry, created_at=utc_now_iso())
        with self._lock:
            self._entries[(entry.content_hash, entry.keyword_hash, entry.level)] = entry

    def fresh(
        self, content_hash: str, keyword_hash: str, level: ZoomLevel
    ) -> SummaryEntry | None:
        """The servable entry for the given hashes, or None."""
        with self._lock:
            entry = self._entries.get((content_hash, keyword_hash, level))
        if entry is None or entry.stale:
            return None
        return entry

    def mark_stale_for_content(self, current_hash: str) -> None:
        """Flag every entry whose content hash no longer matches."""
        with self._lock:
            for key, entry in self._entries.items():
                if entry.content_hash != current_hash and not entry.stale:
                    self._entries[key] = replace(entry, stale=True)

    def entries(self) -> list[SummaryEntry]:
        with self._lock:
            return list(self._entries.values())

    def entry_for_level(
        self, level: ZoomLevel, content_hash: str, keyword_hash: str
    ) -> SummaryEntry | None:
        """Best entry to persist for a level: the one matching the current
        hashes if present, else the newest entry recorded for that level."""
        with self._lock:
            entries = [e for e in self._entries.values() if e.level is level]
        if not entries:
            return None
        for entry in entries:
            if entry.content_hash == content_hash and entry.keyword_hash == keyword_hash:
                return entry
        return max(entries, key=lambda e: e.created_at)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)
