"""Durable document storage: one JSON file per document.

Writes go to a temp file in the same directory, are fsynced, and replace the
target atomically, so a crash never leaves a half-written document behind.
Documents loaded from disk always come back idle; respeak sessions are
process state, not document state.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ramblekit.cache import SummaryCache, SummaryEntry
from ramblekit.document import Ramble, RambleDocument, RawCapture, new_document
from ramblekit.errors import BadRequestError, ConflictError, NotFoundError
from ramblekit.keywords import KeywordEntry, KeywordSet, KeywordSource
from ramblekit.zoom import SUMMARY_LEVELS, ZoomLevel

SCHEMA_VERSION = 1

# doc ids double as file names; keep them boring
_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@lru_cache(maxsize=1)
def document_schema() -> dict:
    path = resources.files("ramblekit").joinpath("data/document.schema.json")
    return json.loads(path.read_text(encoding="utf-8"))


def document_to_dict(doc: RambleDocument) -> dict:
    """Serialize a document. For each ramble, at most one summary per level
    is kept: the entry matching the current hashes, else the newest."""
    rambles = []
    for ramble in doc.rambles:
        summaries = []
        for level in SUMMARY_LEVELS:
            entry = ramble.summaries.entry_for_level(
                level, ramble.content_hash, ramble.keyword_hash
            )
            if entry is not None:
                summaries.append(
                    {
                        "level": entry.level.value,
                        "text": entry.text,
                        "content_hash": entry.content_hash,
                        "keyword_hash": entry.keyword_hash,
                        "stale": entry.stale,
                        "created_at": entry.created_at,
                    }
                )
        rambles.append(
            {
                "ramble_id": ramble.ramble_id,
                "text": ramble.text,
                "raw_history": [
                    {"text": c.text, "at": c.at} for c in ramble.raw_history
                ],
                "keywords": [
                    {
                        "word": e.word,
                        "source": e.source.value,
                        "active": e.active,
                        "score": e.score,
                    }
                    for e in ramble.keywords.entries()
                ],
                "summaries": summaries,
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "title": doc.title,
        "revision": doc.revision,
        "created_at": doc.created_at,
        "updated_at": doc.updated_at,
        "rambles": rambles,
    }


def document_from_dict(data: dict) -> RambleDocument:
    """Rebuild a document; raises BadRequestError on schema violations."""
    try:
        jsonschema.validate(data, document_schema())
    except jsonschema.ValidationError as exc:
        raise BadRequestError(f"document file is invalid: {exc.message}") from exc
    rambles = []
    for item in data["rambles"]:
        keywords = KeywordSet(
            [
                KeywordEntry(
                    word=k["word"],
                    source=KeywordSource(k["source"]),
                    active=k["active"],
                    score=k["score"],
                )
                for k in item["keywords"]
            ]
        )
        summaries = SummaryCache(
            [
                SummaryEntry(
                    level=ZoomLevel(s["level"]),
                    text=s["text"],
                    content_hash=s["content_hash"],
                    keyword_hash=s["keyword_hash"],
                    stale=s.get("stale", False),
                    created_at=s.get("created_at", ""),
                )
                for s in item["summaries"]
            ]
        )
        rambles.append(
            Ramble(
                ramble_id=item["ramble_id"],
                text=item["text"],
                raw_history=[
                    RawCapture(text=c["text"], at=c["at"])
                    for c in item["raw_history"]
                ],
                keywords=keywords,
                summaries=summaries,
            )
        )
    return RambleDocument(
        doc_id=data["doc_id"],
        title=data["title"],
        rambles=rambles,
        revision=data["revision"],
        created_at=data["created_at"],
        updated_at=data["updated_at"],
    )


class DocumentStore:
    """File-backed collection of live documents.

    Loaded documents stay resident so every caller shares one object (and
    its lock); persist() snapshots the current state to disk.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.Lock()
        self._resident: dict[str, RambleDocument] = {}

    def _path(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.json"

    def create(self, title: str = "Untitled", doc_id: str | None = None, **kwargs):
        if doc_id is not None and not _SAFE_ID.match(doc_id):
            raise BadRequestError(f"unusable doc_id: {doc_id!r}")
        doc = new_document(doc_id=doc_id, title=title, **kwargs)
        with self._registry_lock:
            if doc.doc_id in self._resident or self._path(doc.doc_id).exists():
                raise ConflictError(f"document already exists: {doc.doc_id}")
            self._resident[doc.doc_id] = doc
        self.persist(doc.doc_id)
        return doc

    def get(self, doc_id: str) -> RambleDocument:
        with self._registry_lock:
            doc = self._resident.get(doc_id)
            if doc is not None:
                return doc
        path = self._path(doc_id)
        if not _SAFE_ID.match(doc_id) or not path.exists():
            raise NotFoundError(f"no such document: {doc_id}")
        loaded = document_from_dict(json.loads(path.read_text(encoding="utf-8")))
        with self._registry_lock:
            # another thread may have loaded it first; keep the winner
            return self._resident.setdefault(doc_id, loaded)

    def persist(self, doc_id: str) -> None:
        doc = self.get(doc_id)
        with doc.locked():
            payload = json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2)
        _atomic_write(self._path(doc_id), payload)

    def delete(self, doc_id: str) -> None:
        path = self._path(doc_id)
        with self._registry_lock:
            resident = self._resident.pop(doc_id, None)
        if resident is None and not path.exists():
            raise NotFoundError(f"no such document: {doc_id}")
        if path.exists():
            path.unlink()

    def list_ids(self) -> list[str]:
        with self._registry_lock:
            ids = set(self._resident)
        ids.update(p.stem for p in self.root.glob("*.json"))
        return sorted(ids)

    def evict(self, doc_id: str) -> None:
        """Drop the resident copy; the next get() rereads the file."""
        with self._registry_lock:
            self._resident.pop(doc_id, None)


def _atomic_write(path: Path, payload: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(payload)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
