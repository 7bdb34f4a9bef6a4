"""HTTP service contract: revision checks, the finalize pipeline, streaming,
structure operations, transforms, export, and durability."""

import json
import time
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from conftest import CountingBackend, FlakyBackend, make_text
from ramblekit.engine import GistEngine
from ramblekit.prompts import PromptKind
from ramblekit.service import create_app
from ramblekit.store import DocumentStore


@pytest.fixture
def api(tmp_path):
    store = DocumentStore(tmp_path / "docs")
    backend = CountingBackend()
    engine = GistEngine(backend)
    client = TestClient(create_app(store, engine))
    return SimpleNamespace(
        client=client,
        store=store,
        backend=backend,
        engine=engine,
        root=tmp_path / "docs",
    )


def rev(n):
    return {"X-Doc-Revision": str(n)}


def make_doc(api, title="Doc"):
    response = api.client.post("/documents", json={"title": title})
    assert response.status_code == 200
    return response.json()["doc_id"]


def add_ramble(api, doc_id, raw_text, wait=True):
    """Create a ramble and finalize raw text into it; returns (rid, revision)."""
    doc = api.client.get(f"/documents/{doc_id}").json()
    created = api.client.post(
        f"/documents/{doc_id}/rambles", headers=rev(doc["revision"]), json={}
    )
    assert created.status_code == 200
    rid = created.json()["ramble"]["ramble_id"]
    revision = created.json()["revision"]
    finalized = api.client.post(
        f"/documents/{doc_id}/rambles/{rid}/finalize",
        headers=rev(revision),
        params={"wait": "true"} if wait else {},
        json={"raw_text": raw_text},
    )
    assert finalized.status_code == 200, finalized.text
    return rid, finalized.json()["revision"]


def sse_events(body: str):
    events = []
    for block in body.strip().split("\n\n"):
        lines = block.splitlines()
        name = next(l[7:] for l in lines if l.startswith("event: "))
        data = json.loads(next(l[6:] for l in lines if l.startswith("data: ")))
        events.append((name, data))
    return events


class TestDocuments:
    def test_create_and_fetch(self, api):
        doc_id = make_doc(api, title="My notes")
        doc = api.client.get(f"/documents/{doc_id}").json()
        assert doc["title"] == "My notes"
        assert doc["revision"] == 0
        assert doc["rambles"] == []

    def test_missing_document_404(self, api):
        response = api.client.get("/documents/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "NotFound"

    def test_create_rejects_blank_title(self, api):
        response = api.client.post("/documents", json={"title": "  "})
        assert response.status_code == 400


class TestRevisionProtocol:
    def test_missing_header_is_bad_request(self, api):
        doc_id = make_doc(api)
        response = api.client.post(f"/documents/{doc_id}/rambles", json={})
        assert response.status_code == 400
        assert response.json()["code"] == "BadRequest"
        assert "X-Doc-Revision" in response.json()["message"]

    def test_mismatch_is_conflict_and_changes_nothing(self, api):
        doc_id = make_doc(api)
        response = api.client.post(
            f"/documents/{doc_id}/rambles", headers=rev(7), json={}
        )
        assert response.status_code == 409
        assert response.json()["code"] == "Conflict"
        assert response.json()["details"]["revision"] == 0
        assert api.client.get(f"/documents/{doc_id}").json()["rambles"] == []

    def test_non_integer_header_rejected(self, api):
        doc_id = make_doc(api)
        response = api.client.post(
            f"/documents/{doc_id}/rambles",
            headers={"X-Doc-Revision": "seven"},
            json={},
        )
        assert response.status_code == 400

    def test_stale_writer_loses(self, api):
        doc_id = make_doc(api)
        api.client.post(f"/documents/{doc_id}/rambles", headers=rev(0), json={})
        # a second writer still holding revision 0
        response = api.client.post(
            f"/documents/{doc_id}/rambles", headers=rev(0), json={}
        )
        assert response.status_code == 409


class TestFinalize:
    def test_pipeline_commits_clean_text_and_keywords(self, api):
        doc_id = make_doc(api)
        rid, _ = add_ramble(api, doc_id, "so the  garden was full of tomatoes")
        ramble = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]
        assert ramble["text"] == "So the garden was full of tomatoes."
        assert ramble["active_keywords"]
        assert all(ramble["summaries"][l] for l in ("half", "quarter", "gist"))

    def test_exact_backend_call_counts(self, api):
        doc_id = make_doc(api)
        add_ramble(api, doc_id, make_text(sentences=5, seed=30))
        assert api.backend.count(PromptKind.CLEAN) == 1
        assert api.backend.count(PromptKind.SUMMARIZE) == 3

    def test_repeat_finalize_costs_nothing(self, api):
        doc_id = make_doc(api)
        raw = make_text(sentences=4, seed=31)
        rid, revision = add_ramble(api, doc_id, raw)
        api.backend.reset()
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/finalize",
            headers=rev(revision),
            params={"wait": "true"},
            json={"raw_text": raw},
        )
        assert response.status_code == 200
        assert api.backend.count() == 0

    def test_background_pregeneration_lands_eventually(self, api):
        doc_id = make_doc(api)
        rid, _ = add_ramble(api, doc_id, make_text(seed=32), wait=False)
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            ramble = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]
            if all(ramble["summaries"].values()):
                break
            time.sleep(0.02)
        else:
            pytest.fail("summaries never became fresh")

    def test_empty_raw_text_rejected(self, api):
        doc_id = make_doc(api)
        doc = api.client.get(f"/documents/{doc_id}").json()
        created = api.client.post(
            f"/documents/{doc_id}/rambles", headers=rev(doc["revision"]), json={}
        )
        rid = created.json()["ramble"]["ramble_id"]
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/finalize",
            headers=rev(created.json()["revision"]),
            json={"raw_text": "   "},
        )
        assert response.status_code == 400

    def test_clean_failure_keeps_raw_capture(self, tmp_path):
        store = DocumentStore(tmp_path / "docs")
        engine = GistEngine(FlakyBackend(failures=2))
        client = TestClient(create_app(store, engine))
        doc_id = client.post("/documents", json={}).json()["doc_id"]
        created = client.post(f"/documents/{doc_id}/rambles", headers=rev(0), json={})
        rid = created.json()["ramble"]["ramble_id"]
        response = client.post(
            f"/documents/{doc_id}/rambles/{rid}/finalize",
            headers=rev(1),
            json={"raw_text": "precious dictation"},
        )
        assert response.status_code == 502
        assert response.json()["code"] == "BackendFailure"
        ramble = store.get(doc_id).get_ramble(rid)
        assert ramble.text == ""
        assert [c.text for c in ramble.raw_history] == ["precious dictation"]
        # the capture survived to disk too
        fresh = DocumentStore(tmp_path / "docs")
        fresh.evict(doc_id)
        assert fresh.get(doc_id).get_ramble(rid).raw_history[0].text == (
            "precious dictation"
        )


class TestTextEdit:
    def test_keyboard_edit_commits(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "original words here")
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/text",
            headers=rev(revision),
            json={"text": "Edited by keyboard."},
        )
        assert response.status_code == 200
        assert response.json()["ramble"]["text"] == "Edited by keyboard."
        # old summaries are no longer served
        assert all(
            v is None for v in response.json()["ramble"]["summaries"].values()
        )


class TestRespeak:
    def test_begin_then_append(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "the first half")
        begun = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(revision),
            json={"action": "begin"},
        )
        assert begun.status_code == 200
        assert begun.json()["original_text"] == "The first half."
        state = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]["state"]
        assert state == "respeaking"
        committed = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(begun.json()["revision"]),
            json={"action": "commit", "mode": "append", "new_text": "and the second"},
        )
        assert committed.status_code == 200
        assert committed.json()["ramble"]["text"] == (
            "The first half. And the second."
        )
        assert committed.json()["ramble"]["state"] == "idle"

    def test_discard_restores_exactly(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "keep me")
        begun = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(revision),
            json={"action": "begin"},
        )
        committed = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(begun.json()["revision"]),
            json={"action": "commit", "mode": "discard"},
        )
        assert committed.status_code == 200
        assert committed.json()["ramble"]["text"] == "Keep me."

    def test_finalize_while_respeaking_conflicts(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "text")
        begun = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(revision),
            json={"action": "begin"},
        )
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/finalize",
            headers=rev(begun.json()["revision"]),
            json={"raw_text": "more"},
        )
        assert response.status_code == 409

    def test_unknown_mode_rejected(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "text")
        api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(revision),
            json={"action": "begin"},
        )
        doc = api.client.get(f"/documents/{doc_id}").json()
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/respeak",
            headers=rev(doc["revision"]),
            json={"action": "commit", "mode": "sideways"},
        )
        assert response.status_code == 400


class TestStructure:
    def test_manual_split(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "left words. right words")
        text = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]["text"]
        boundary = text.index(".") + 1
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/split",
            headers=rev(revision),
            json={"mode": "manual", "boundary": boundary},
        )
        assert response.status_code == 200
        halves = response.json()["rambles"]
        assert len(halves) == 2
        assert halves[0]["ramble_id"] == rid

    def test_semantic_split_preserves_position(self, api):
        doc_id = make_doc(api)
        first, _ = add_ramble(api, doc_id, "An opening ramble stays first.")
        middle, _ = add_ramble(api, doc_id, make_text(sentences=6, seed=33))
        last, revision = add_ramble(api, doc_id, "A closing ramble stays last.")
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{middle}/split",
            headers=rev(revision),
            json={"mode": "semantic"},
        )
        assert response.status_code == 200
        parts = response.json()["rambles"]
        assert len(parts) >= 2
        order = [
            r["ramble_id"]
            for r in api.client.get(f"/documents/{doc_id}").json()["rambles"]
        ]
        assert order[0] == first
        assert order[-1] == last
        assert order[1 : 1 + len(parts)] == [r["ramble_id"] for r in parts]
        assert parts[0]["ramble_id"] == middle

    def test_manual_merge(self, api):
        doc_id = make_doc(api)
        a, _ = add_ramble(api, doc_id, "first piece")
        b, revision = add_ramble(api, doc_id, "second piece")
        response = api.client.post(
            f"/documents/{doc_id}/merge",
            headers=rev(revision),
            json={"ramble_ids": [a, b], "mode": "manual"},
        )
        assert response.status_code == 200
        assert response.json()["ramble"]["text"] == "First piece. Second piece."
        assert len(api.client.get(f"/documents/{doc_id}").json()["rambles"]) == 1

    def test_semantic_merge_takes_first_position(self, api):
        doc_id = make_doc(api)
        head, _ = add_ramble(api, doc_id, "the head stays put")
        a, _ = add_ramble(api, doc_id, "merge me first")
        b, revision = add_ramble(api, doc_id, "merge me second")
        response = api.client.post(
            f"/documents/{doc_id}/merge",
            headers=rev(revision),
            json={"ramble_ids": [a, b], "mode": "semantic"},
        )
        assert response.status_code == 200
        order = [
            r["ramble_id"]
            for r in api.client.get(f"/documents/{doc_id}").json()["rambles"]
        ]
        assert order == [head, a]

    def test_reorder_and_delete(self, api):
        doc_id = make_doc(api)
        a, _ = add_ramble(api, doc_id, "alpha text")
        b, revision = add_ramble(api, doc_id, "beta text")
        moved = api.client.post(
            f"/documents/{doc_id}/reorder",
            headers=rev(revision),
            json={"ramble_id": b, "new_index": 0},
        )
        assert moved.status_code == 200
        deleted = api.client.delete(
            f"/documents/{doc_id}/rambles/{a}",
            headers=rev(moved.json()["revision"]),
        )
        assert deleted.status_code == 200
        remaining = api.client.get(f"/documents/{doc_id}").json()["rambles"]
        assert [r["ramble_id"] for r in remaining] == [b]


class TestKeywordsAndRegenerate:
    def test_toggle_changes_active_set(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "alpha beta gamma delta epsilon")
        before = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]
        target = before["active_keywords"][0]
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/keywords",
            headers=rev(revision),
            json={"word": target},
        )
        assert response.status_code == 200
        after = response.json()["ramble"]
        assert target not in after["active_keywords"]
        assert after["keyword_hash"] != before["keyword_hash"]

    def test_toggle_missing_word_rejected(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "alpha beta")
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/keywords",
            headers=rev(revision),
            json={"word": "zebra"},
        )
        assert response.status_code == 400

    def test_regenerate_after_toggle(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, make_text(sentences=5, seed=34))
        ramble = api.client.get(f"/documents/{doc_id}").json()["rambles"][0]
        toggled = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/keywords",
            headers=rev(revision),
            json={"word": ramble["active_keywords"][0]},
        )
        # summaries for the new keyword hash do not exist yet
        assert all(v is None for v in toggled.json()["ramble"]["summaries"].values())
        api.backend.reset()
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/regenerate",
            headers=rev(toggled.json()["revision"]),
        )
        assert response.status_code == 200
        assert all(l["ok"] for l in response.json()["levels"].values())
        assert api.backend.count(PromptKind.SUMMARIZE) == 3

    def test_regenerate_unchanged_costs_nothing(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, make_text(seed=35))
        api.backend.reset()
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/regenerate",
            headers=rev(revision),
        )
        assert response.status_code == 200
        assert api.backend.count() == 0

    def test_regenerate_empty_ramble_rejected(self, api):
        doc_id = make_doc(api)
        created = api.client.post(
            f"/documents/{doc_id}/rambles", headers=rev(0), json={}
        )
        rid = created.json()["ramble"]["ramble_id"]
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/regenerate",
            headers=rev(created.json()["revision"]),
        )
        assert response.status_code == 400


class TestSummaryStream:
    def test_fresh_cache_single_done(self, api):
        doc_id = make_doc(api)
        rid, _ = add_ramble(api, doc_id, make_text(seed=36))
        api.backend.reset()
        response = api.client.get(
            f"/documents/{doc_id}/rambles/{rid}/summary", params={"level": "gist"}
        )
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        events = sse_events(response.text)
        assert [e[0] for e in events] == ["done"]
        assert api.backend.count() == 0

    def test_live_stream_prefix_law(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, make_text(sentences=8, seed=37))
        api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/text",
            headers=rev(revision),
            json={"text": make_text(sentences=9, seed=38)},
        )
        response = api.client.get(
            f"/documents/{doc_id}/rambles/{rid}/summary", params={"level": "half"}
        )
        events = sse_events(response.text)
        chunks = [e[1]["delta"] for e in events if e[0] == "chunk"]
        dones = [e[1] for e in events if e[0] == "done"]
        assert len(dones) == 1
        assert "".join(chunks) == dones[0]["text"]
        assert dones[0]["level"] == "half"

    def test_full_level_rejected(self, api):
        doc_id = make_doc(api)
        rid, _ = add_ramble(api, doc_id, "words")
        response = api.client.get(
            f"/documents/{doc_id}/rambles/{rid}/summary", params={"level": "full"}
        )
        assert response.status_code == 400

    def test_backend_failure_becomes_error_event(self, tmp_path):
        store = DocumentStore(tmp_path / "docs")
        flaky = FlakyBackend(failures=99)
        client = TestClient(create_app(store, GistEngine(flaky)))
        doc_id = client.post("/documents", json={}).json()["doc_id"]
        doc = store.get(doc_id)
        ramble = doc.create_ramble()
        doc.commit_text(ramble.ramble_id, "Some committed text.")
        response = client.get(
            f"/documents/{doc_id}/rambles/{ramble.ramble_id}/summary",
            params={"level": "gist"},
        )
        events = sse_events(response.text)
        assert events[-1] == ("error", {"code": "BackendFailure"})


class TestTransform:
    def test_propose_then_accept(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "transform target text")
        proposed = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/transform",
            headers=rev(revision),
            json={"prompt": "Make it shine.", "include_keywords": True},
        )
        assert proposed.status_code == 200
        body = proposed.json()
        # offline backend echoes the input as the candidate
        assert body["candidate_text"] == "Transform target text."
        # proposing does not change the document
        assert api.client.get(f"/documents/{doc_id}").json()["revision"] == revision
        accepted = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/transform/"
            f"{body['proposal_id']}/accept",
            headers=rev(revision),
        )
        assert accepted.status_code == 200
        assert accepted.json()["revision"] == revision + 1

    def test_accept_after_edit_conflicts(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "stable text")
        proposed = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/transform",
            headers=rev(revision),
            json={"prompt": "Do something."},
        )
        edited = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/text",
            headers=rev(revision),
            json={"text": "It moved on."},
        )
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/transform/"
            f"{proposed.json()['proposal_id']}/accept",
            headers=rev(edited.json()["revision"]),
        )
        assert response.status_code == 409

    def test_unknown_proposal_404(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "text")
        response = api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/transform/nope/accept",
            headers=rev(revision),
        )
        assert response.status_code == 404


class TestExport:
    def test_full_export(self, api):
        doc_id = make_doc(api)
        add_ramble(api, doc_id, "first ramble")
        add_ramble(api, doc_id, "second ramble")
        response = api.client.get(
            f"/documents/{doc_id}/export", params={"level": "full"}
        )
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/plain")
        assert response.text == "First ramble.\n\nSecond ramble."

    def test_summary_export_after_finalize(self, api):
        doc_id = make_doc(api)
        add_ramble(api, doc_id, make_text(sentences=4, seed=39))
        response = api.client.get(
            f"/documents/{doc_id}/export", params={"level": "gist"}
        )
        assert response.status_code == 200
        assert response.text

    def test_stale_export_blocked_with_details(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "some text here")
        api.client.post(
            f"/documents/{doc_id}/rambles/{rid}/text",
            headers=rev(revision),
            json={"text": "Invalidated by this edit."},
        )
        response = api.client.get(
            f"/documents/{doc_id}/export", params={"level": "gist"}
        )
        assert response.status_code == 409
        body = response.json()
        assert body["code"] == "InvalidState"
        assert body["details"]["ramble_ids"] == [rid]

    def test_unknown_level_rejected(self, api):
        doc_id = make_doc(api)
        response = api.client.get(
            f"/documents/{doc_id}/export", params={"level": "mega"}
        )
        assert response.status_code == 400


class TestDurability:
    def test_restart_preserves_document_and_caches(self, api, tmp_path):
        doc_id = make_doc(api)
        add_ramble(api, doc_id, make_text(sentences=4, seed=40))
        add_ramble(api, doc_id, make_text(sentences=3, seed=41))
        # a second process over the same store directory
        reborn_store = DocumentStore(api.root)
        reborn = TestClient(create_app(reborn_store, GistEngine(CountingBackend())))
        doc = reborn.get(f"/documents/{doc_id}").json()
        assert len(doc["rambles"]) == 2
        for level in ("half", "quarter", "gist"):
            response = reborn.get(
                f"/documents/{doc_id}/export", params={"level": level}
            )
            assert response.status_code == 200, response.text
            assert response.text

    def test_every_mutation_is_on_disk_before_response(self, api):
        doc_id = make_doc(api)
        rid, revision = add_ramble(api, doc_id, "durable words")
        fresh = DocumentStore(api.root)
        assert fresh.get(doc_id).get_ramble(rid).text == "Durable words."
