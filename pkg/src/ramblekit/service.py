"""HTTP service over documents: every operation the editor needs, plus
server-sent summary streams.

Concurrency contract: each mutating request carries the client's last-seen
revision in X-Doc-Revision; a mismatch is a Conflict and changes nothing.
A successful mutation is persisted before the response goes out. Summary
pre-generation runs in the background and persists again when it finishes,
so cached summaries survive a restart.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass
from typing import Iterator

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from ramblekit.cache import utc_now_iso
from ramblekit.document import Ramble, RambleDocument, RambleState, RespeakAction
from ramblekit.engine import GistEngine
from ramblekit.errors import (
    BadRequestError,
    ConflictError,
    NotFoundError,
    RamblekitError,
)
from ramblekit.store import DocumentStore
from ramblekit.zoom import SUMMARY_LEVELS, ZoomLevel, parse_level

logger = logging.getLogger(__name__)

_STATUS = {
    "NotFound": 404,
    "Conflict": 409,
    "InvalidState": 409,
    "BadRequest": 400,
    "BackendFailure": 502,
}


@dataclass
class TransformProposal:
    proposal_id: str
    doc_id: str
    ramble_id: str
    content_hash: str
    candidate_text: str
    created_at: str


def _sse(event: str, payload: dict) -> str:
    return f"event: {event}\ndata: {json.dumps(payload, ensure_ascii=False)}\n\n"


def ramble_view(ramble: Ramble) -> dict:
    summaries = {}
    for level in SUMMARY_LEVELS:
        entry = ramble.summaries.fresh(
            ramble.content_hash, ramble.keyword_hash, level
        )
        summaries[level.value] = None if entry is None else {"text": entry.text}
    return {
        "ramble_id": ramble.ramble_id,
        "text": ramble.text,
        "state": ramble.state.value,
        "content_hash": ramble.content_hash,
        "keyword_hash": ramble.keyword_hash,
        "keywords": [
            {
                "word": e.word,
                "source": e.source.value,
                "active": e.active,
                "score": e.score,
            }
            for e in ramble.keywords.entries()
        ],
        "active_keywords": ramble.active_keywords(),
        "summaries": summaries,
    }


def document_view(doc: RambleDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "revision": doc.revision,
        "created_at": doc.created_at,
        "updated_at": doc.updated_at,
        "rambles": [ramble_view(r) for r in doc.rambles],
    }


def _claimed_revision(request: Request) -> int:
    header = request.headers.get("X-Doc-Revision")
    if header is None:
        raise BadRequestError("X-Doc-Revision header is required")
    try:
        return int(header)
    except ValueError:
        raise BadRequestError(f"X-Doc-Revision must be an integer: {header!r}")


def _str_field(body: dict, name: str) -> str:
    value = body.get(name)
    if not isinstance(value, str) or not value.strip():
        raise BadRequestError(f"{name} must be a non-empty string")
    return value


def _int_field(body: dict, name: str) -> int:
    value = body.get(name)
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadRequestError(f"{name} must be an integer")
    return value


def create_app(store: DocumentStore, engine: GistEngine) -> FastAPI:
    app = FastAPI(title="ramblekit", docs_url=None, redoc_url=None)
    # browser editors run on a different origin than the API
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    proposals: dict[str, TransformProposal] = {}
    proposals_lock = threading.Lock()

    @app.exception_handler(RamblekitError)
    def on_kit_error(request: Request, exc: RamblekitError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 400),
            content={"code": exc.code, "message": str(exc), "details": exc.details},
        )

    @app.exception_handler(RequestValidationError)
    def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "BadRequest",
                "message": "malformed request body",
                "details": {},
            },
        )

    def check_revision(doc: RambleDocument, request: Request) -> None:
        """Revision check without holding the document lock; used by the
        cache-only operations that would otherwise block readers."""
        claimed = _claimed_revision(request)
        if claimed != doc.revision:
            raise ConflictError(
                f"document is at revision {doc.revision}, not {claimed}",
                details={"revision": doc.revision},
            )

    class guarded:
        """Context manager: revision check and mutation under one lock."""

        def __init__(self, doc_id: str, request: Request):
            self.doc = store.get(doc_id)
            self.request = request

        def __enter__(self) -> RambleDocument:
            self.doc._lock.acquire()
            try:
                claimed = _claimed_revision(self.request)
                if claimed != self.doc.revision:
                    raise ConflictError(
                        f"document is at revision {self.doc.revision}, not {claimed}",
                        details={"revision": self.doc.revision},
                    )
            except BaseException:
                self.doc._lock.release()
                raise
            return self.doc

        def __exit__(self, *exc_info):
            self.doc._lock.release()
            return False

    def pregenerate_and_persist(doc_id: str, ramble: Ramble) -> None:
        engine.pregenerate(ramble).wait()
        try:
            store.persist(doc_id)
        except Exception:
            logger.exception("failed to persist %s after pre-generation", doc_id)

    def spawn_pregenerate(doc_id: str, ramble: Ramble) -> None:
        threading.Thread(
            target=pregenerate_and_persist,
            args=(doc_id, ramble),
            name=f"pregen-{ramble.ramble_id}",
            daemon=True,
        ).start()

    # -- documents ---------------------------------------------------------

    @app.post("/documents")
    def create_document(body: dict = Body(default={})):
        title = body.get("title", "Untitled")
        if not isinstance(title, str) or not title.strip():
            raise BadRequestError("title must be a non-empty string")
        doc = store.create(title=title.strip())
        return {"doc_id": doc.doc_id, "revision": doc.revision}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        return document_view(store.get(doc_id))

    # -- rambles -----------------------------------------------------------

    @app.post("/documents/{doc_id}/rambles")
    def create_ramble(doc_id: str, request: Request, body: dict = Body(default={})):
        insert_index = body.get("insert_index")
        if insert_index is not None and (
            isinstance(insert_index, bool) or not isinstance(insert_index, int)
        ):
            raise BadRequestError("insert_index must be an integer")
        with guarded(doc_id, request) as doc:
            ramble = doc.create_ramble(insert_index)
        store.persist(doc_id)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    @app.delete("/documents/{doc_id}/rambles/{ramble_id}")
    def delete_ramble(doc_id: str, ramble_id: str, request: Request):
        with guarded(doc_id, request) as doc:
            doc.delete_ramble(ramble_id)
        store.persist(doc_id)
        return {"revision": doc.revision}

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/finalize")
    def finalize(
        doc_id: str,
        ramble_id: str,
        request: Request,
        wait: bool = False,
        body: dict = Body(...),
    ):
        raw_text = _str_field(body, "raw_text")
        with guarded(doc_id, request) as doc:
            ramble = doc.get_ramble(ramble_id)
            if ramble.state is not RambleState.IDLE:
                raise ConflictError(f"ramble is {ramble.state.value}")
            doc.record_raw_capture(ramble_id, raw_text)
        try:
            cleaned = engine.clean_transcript(raw_text)
        except RamblekitError:
            # the capture is kept even though cleaning failed
            store.persist(doc_id)
            raise
        doc.commit_text(ramble_id, cleaned)
        store.persist(doc_id)
        if wait:
            pregenerate_and_persist(doc_id, ramble)
        else:
            spawn_pregenerate(doc_id, ramble)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/text")
    def replace_text(
        doc_id: str, ramble_id: str, request: Request, body: dict = Body(...)
    ):
        text = _str_field(body, "text")
        with guarded(doc_id, request) as doc:
            ramble = doc.commit_text(ramble_id, text)
        store.persist(doc_id)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/respeak")
    def respeak(
        doc_id: str, ramble_id: str, request: Request, body: dict = Body(...)
    ):
        action = body.get("action")
        if action == "begin":
            with guarded(doc_id, request) as doc:
                session = doc.respeak_begin(ramble_id)
            store.persist(doc_id)
            return {
                "original_text": session.original_text,
                "revision": doc.revision,
            }
        if action != "commit":
            raise BadRequestError("action must be \"begin\" or \"commit\"")
        mode = body.get("mode")
        try:
            respeak_action = RespeakAction(mode)
        except ValueError:
            raise BadRequestError("mode must be append, replace, or discard")
        new_text = body.get("new_text", "")
        if not isinstance(new_text, str):
            raise BadRequestError("new_text must be a string")
        with guarded(doc_id, request) as doc:
            ramble = doc.respeak_commit(
                ramble_id,
                respeak_action,
                cleaner=engine.clean_transcript,
                new_text=new_text,
            )
        store.persist(doc_id)
        if respeak_action is not RespeakAction.DISCARD:
            spawn_pregenerate(doc_id, ramble)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    # -- structure -----------------------------------------------------------

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/split")
    def split(doc_id: str, ramble_id: str, request: Request, body: dict = Body(...)):
        mode = body.get("mode")
        if mode == "manual":
            boundary = _int_field(body, "boundary")
            with guarded(doc_id, request) as doc:
                left, right = doc.manual_split(ramble_id, boundary)
                parts = [left, right]
        elif mode == "semantic":
            doc = store.get(doc_id)
            text = doc.get_ramble(ramble_id).text
            part_texts = engine.semantic_split(text)
            with guarded(doc_id, request) as doc:
                parts = doc.replace_with_parts(ramble_id, part_texts)
        else:
            raise BadRequestError("mode must be \"manual\" or \"semantic\"")
        store.persist(doc_id)
        return {
            "rambles": [ramble_view(r) for r in parts],
            "revision": doc.revision,
        }

    @app.post("/documents/{doc_id}/merge")
    def merge(doc_id: str, request: Request, body: dict = Body(...)):
        ramble_ids = body.get("ramble_ids")
        if (
            not isinstance(ramble_ids, list)
            or len(ramble_ids) < 2
            or not all(isinstance(r, str) for r in ramble_ids)
        ):
            raise BadRequestError("ramble_ids must list at least two ids")
        mode = body.get("mode")
        if mode == "manual":
            with guarded(doc_id, request) as doc:
                target = doc.get_ramble(ramble_ids[0])
                for source_id in ramble_ids[1:]:
                    target = doc.manual_merge(target.ramble_id, source_id)
        elif mode == "semantic":
            doc = store.get(doc_id)
            rambles = [doc.get_ramble(rid) for rid in ramble_ids]
            texts = [r.text for r in rambles]
            keywords: list[str] = []
            for ramble in rambles:
                for word in ramble.active_keywords():
                    if word not in keywords:
                        keywords.append(word)
            merged = engine.semantic_merge(texts, keywords)
            with guarded(doc_id, request) as doc:
                target = doc.merge_rambles(ramble_ids, merged)
        else:
            raise BadRequestError("mode must be \"manual\" or \"semantic\"")
        store.persist(doc_id)
        return {"ramble": ramble_view(target), "revision": doc.revision}

    @app.post("/documents/{doc_id}/reorder")
    def reorder(doc_id: str, request: Request, body: dict = Body(...)):
        ramble_id = _str_field(body, "ramble_id")
        new_index = _int_field(body, "new_index")
        with guarded(doc_id, request) as doc:
            doc.reorder(ramble_id, new_index)
        store.persist(doc_id)
        return {"revision": doc.revision}

    # -- keywords and summaries ------------------------------------------------

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/keywords")
    def toggle_keyword(
        doc_id: str, ramble_id: str, request: Request, body: dict = Body(...)
    ):
        word = _str_field(body, "word")
        with guarded(doc_id, request) as doc:
            ramble = doc.toggle_keyword(ramble_id, word)
        store.persist(doc_id)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/regenerate")
    def regenerate(doc_id: str, ramble_id: str, request: Request):
        doc = store.get(doc_id)
        check_revision(doc, request)
        ramble = doc.get_ramble(ramble_id)
        if not ramble.text.strip():
            raise BadRequestError("ramble has no text to summarize")
        results = engine.pregenerate(ramble).wait()
        store.persist(doc_id)
        return {
            "levels": {
                level.value: {"ok": r.ok, "text": r.text, "error": r.error}
                for level, r in results.items()
            },
            "revision": doc.revision,
        }

    @app.get("/documents/{doc_id}/rambles/{ramble_id}/summary")
    def summary_stream(doc_id: str, ramble_id: str, level: str):
        doc = store.get(doc_id)
        ramble = doc.get_ramble(ramble_id)
        zoom = parse_level(level)
        if zoom not in SUMMARY_LEVELS:
            raise BadRequestError("level must be half, quarter, or gist")
        stream = engine.stream_summary(ramble, zoom)

        def events() -> Iterator[str]:
            try:
                for event, payload in stream:
                    if event == "chunk":
                        yield _sse("chunk", {"level": zoom.value, "delta": payload})
                    else:
                        yield _sse("done", {"level": zoom.value, "text": payload})
                        try:
                            store.persist(doc_id)
                        except Exception:
                            logger.exception("post-stream persist failed")
            except RamblekitError as exc:
                yield _sse("error", {"code": exc.code})
            except Exception:
                logger.exception("summary stream failed")
                yield _sse("error", {"code": "BackendFailure"})

        return StreamingResponse(events(), media_type="text/event-stream")

    # -- transforms ---------------------------------------------------------------

    @app.post("/documents/{doc_id}/rambles/{ramble_id}/transform")
    def transform(
        doc_id: str, ramble_id: str, request: Request, body: dict = Body(...)
    ):
        prompt = _str_field(body, "prompt")
        include_keywords = body.get("include_keywords", False)
        if not isinstance(include_keywords, bool):
            raise BadRequestError("include_keywords must be a boolean")
        doc = store.get(doc_id)
        check_revision(doc, request)
        ramble = doc.get_ramble(ramble_id)
        if not ramble.text.strip():
            raise BadRequestError("ramble has no text to transform")
        candidate = engine.custom_transform(
            ramble.text,
            prompt,
            keywords=tuple(ramble.active_keywords()),
            include_keywords=include_keywords,
        )
        proposal = TransformProposal(
            proposal_id=uuid.uuid4().hex,
            doc_id=doc_id,
            ramble_id=ramble_id,
            content_hash=ramble.content_hash,
            candidate_text=candidate,
            created_at=utc_now_iso(),
        )
        with proposals_lock:
            proposals[proposal.proposal_id] = proposal
        return {
            "proposal_id": proposal.proposal_id,
            "candidate_text": candidate,
            "revision": doc.revision,
        }

    @app.post(
        "/documents/{doc_id}/rambles/{ramble_id}/transform/{proposal_id}/accept"
    )
    def accept_transform(
        doc_id: str, ramble_id: str, proposal_id: str, request: Request
    ):
        with proposals_lock:
            proposal = proposals.get(proposal_id)
        if (
            proposal is None
            or proposal.doc_id != doc_id
            or proposal.ramble_id != ramble_id
        ):
            raise NotFoundError(f"no such proposal: {proposal_id}")
        with guarded(doc_id, request) as doc:
            ramble = doc.get_ramble(ramble_id)
            if ramble.content_hash != proposal.content_hash:
                raise ConflictError("the ramble changed after the proposal was made")
            doc.commit_text(ramble_id, proposal.candidate_text)
        with proposals_lock:
            proposals.pop(proposal_id, None)
        store.persist(doc_id)
        return {"ramble": ramble_view(ramble), "revision": doc.revision}

    # -- export -----------------------------------------------------------------

    @app.get("/documents/{doc_id}/export")
    def export(doc_id: str, level: str):
        doc = store.get(doc_id)
        return PlainTextResponse(doc.export(parse_level(level)))

    return app
