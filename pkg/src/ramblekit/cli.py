"""Command line front door: batch-process transcripts, manipulate stored
documents, export, and serve the HTTP API.

Exit codes: 0 success, 1 runtime or backend failure, 2 usage error. Batch
commands wait for summary pre-generation; the interactive service does not.
"""

from __future__ import annotations

import hashlib
import itertools
import json as jsonlib
import sys
from pathlib import Path

import click
from filelock import FileLock

from ramblekit.backends import OfflineBackend, RemoteBackend, ReplayBackend
from ramblekit.document import new_document
from ramblekit.engine import GistEngine
from ramblekit.errors import BadRequestError, RamblekitError
from ramblekit.store import DocumentStore, _atomic_write, document_to_dict
from ramblekit.stt import ScriptedSource, load_script, run_dictation
from ramblekit.zoom import SUMMARY_LEVELS, parse_level

_LEVELS = ("full", "half", "quarter", "gist")


def _make_backend(name: str, fixtures: str | None):
    if name == "offline":
        return OfflineBackend()
    if name == "replay":
        if not fixtures:
            raise click.UsageError("--backend replay requires --fixtures DIR")
        return ReplayBackend(fixtures)
    if name == "remote":
        return RemoteBackend()
    raise click.UsageError(f"unknown backend: {name}")


class Context:
    def __init__(self, store_dir: str, backend: str, fixtures: str | None, as_json: bool):
        self.store_dir = Path(store_dir)
        self.as_json = as_json
        self.engine = GistEngine(_make_backend(backend, fixtures))
        self._store: DocumentStore | None = None

    @property
    def store(self) -> DocumentStore:
        if self._store is None:
            self._store = DocumentStore(self.store_dir)
        return self._store

    def lock(self) -> FileLock:
        self.store_dir.mkdir(parents=True, exist_ok=True)
        return FileLock(self.store_dir / ".ramblekit.lock")

    def emit(self, payload: dict, human: str) -> None:
        if self.as_json:
            click.echo(jsonlib.dumps(payload, ensure_ascii=False))
        else:
            click.echo(human)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.option(
    "--store",
    "store_dir",
    default="./ramblekit-store",
    envvar="RAMBLEKIT_STORE",
    show_default=True,
    help="Directory holding document files.",
)
@click.option(
    "--backend",
    type=click.Choice(["offline", "replay", "remote"]),
    default="offline",
    show_default=True,
    help="Generation backend.",
)
@click.option(
    "--fixtures",
    type=click.Path(exists=True, file_okay=False),
    default=None,
    help="Fixture directory for the replay backend.",
)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, store_dir, backend, fixtures, as_json):
    """Voice-first drafting from the command line."""
    ctx.obj = Context(store_dir, backend, fixtures, as_json)


@main.command("process")
@click.argument("transcript", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output document path; defaults into the store.")
@click.option("--title", default=None, help="Document title.")
@click.pass_obj
def cmd_process(app: Context, transcript, out, title):
    """Run a transcript file through the full pipeline, one ramble per line.

    The document id and ramble ids are derived deterministically from the
    input, so reruns produce identical files apart from timestamps.
    """
    path = Path(transcript)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
    doc_id = f"doc-{digest}"
    counter = itertools.count(1)
    doc = new_document(
        doc_id=doc_id,
        title=title or path.stem,
        id_factory=lambda: f"rb-{next(counter):04d}",
    )
    out_path = Path(out) if out else app.store_dir / f"{doc_id}.json"

    def write_document() -> None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(
            out_path,
            jsonlib.dumps(document_to_dict(doc), ensure_ascii=False, indent=2),
        )

    with app.lock():
        failure = None
        for line in load_script(path):
            ramble = doc.create_ramble()
            raw = run_dictation(ScriptedSource([line])).text
            doc.record_raw_capture(ramble.ramble_id, raw)
            try:
                cleaned = app.engine.clean_transcript(raw)
            except RamblekitError as exc:
                failure = f"cleaning failed on {ramble.ramble_id}: {exc}"
                break
            doc.commit_text(ramble.ramble_id, cleaned)
        if failure is None:
            handles = [(r, app.engine.pregenerate(r)) for r in doc.rambles]
            for ramble, handle in handles:
                for level, result in handle.wait().items():
                    if not result.ok:
                        failure = (
                            f"{level.value} summary failed on "
                            f"{ramble.ramble_id}: {result.error}"
                        )
        write_document()
    if failure is not None:
        _fail(f"{failure} (partial document written to {out_path})")
    app.emit(
        {"doc_id": doc_id, "path": str(out_path), "rambles": len(doc.rambles)},
        f"wrote {doc_id} ({len(doc.rambles)} rambles) to {out_path}",
    )


@main.command("export")
@click.argument("doc_id")
@click.option("--level", type=click.Choice(_LEVELS), required=True)
@click.pass_obj
def cmd_export(app: Context, doc_id, level):
    """Print the document at a zoom level."""
    try:
        text = app.store.get(doc_id).export(parse_level(level))
    except RamblekitError as exc:
        _fail(str(exc))
    app.emit({"level": level, "text": text}, text)


@main.command("split")
@click.argument("doc_id")
@click.argument("ramble_id")
@click.option("--mode", type=click.Choice(["manual", "semantic"]), required=True)
@click.option("--boundary", type=int, default=None,
              help="Character offset for manual mode.")
@click.pass_obj
def cmd_split(app: Context, doc_id, ramble_id, mode, boundary):
    """Split a ramble in two (manual) or into parts (semantic)."""
    if mode == "manual" and boundary is None:
        raise click.UsageError("--mode manual requires --boundary")
    with app.lock():
        try:
            doc = app.store.get(doc_id)
            if mode == "manual":
                parts = list(doc.manual_split(ramble_id, boundary))
            else:
                texts = app.engine.semantic_split(doc.get_ramble(ramble_id).text)
                parts = doc.replace_with_parts(ramble_id, texts)
            for ramble in parts:
                app.engine.pregenerate(ramble).wait()
            app.store.persist(doc_id)
        except BadRequestError as exc:
            raise click.UsageError(str(exc))
        except RamblekitError as exc:
            _fail(str(exc))
    app.emit(
        {
            "rambles": [r.ramble_id for r in parts],
            "revision": doc.revision,
        },
        "\n".join(f"{r.ramble_id}: {r.text}" for r in parts),
    )


@main.command("merge")
@click.argument("doc_id")
@click.option("--rambles", "ramble_ids", multiple=True, required=True,
              help="Ramble id; repeat the flag, order matters.")
@click.option("--mode", type=click.Choice(["manual", "semantic"]), required=True)
@click.pass_obj
def cmd_merge(app: Context, doc_id, ramble_ids, mode):
    """Merge rambles into the first one given."""
    ids = list(ramble_ids)
    if len(ids) < 2:
        raise click.UsageError("--rambles must be given at least twice")
    with app.lock():
        try:
            doc = app.store.get(doc_id)
            if mode == "manual":
                target = doc.get_ramble(ids[0])
                for source_id in ids[1:]:
                    target = doc.manual_merge(target.ramble_id, source_id)
            else:
                rambles = [doc.get_ramble(rid) for rid in ids]
                keywords: list[str] = []
                for ramble in rambles:
                    for word in ramble.active_keywords():
                        if word not in keywords:
                            keywords.append(word)
                merged = app.engine.semantic_merge(
                    [r.text for r in rambles], keywords
                )
                target = doc.merge_rambles(ids, merged)
            app.engine.pregenerate(target).wait()
            app.store.persist(doc_id)
        except BadRequestError as exc:
            raise click.UsageError(str(exc))
        except RamblekitError as exc:
            _fail(str(exc))
    app.emit(
        {
            "ramble_id": target.ramble_id,
            "text": target.text,
            "revision": doc.revision,
        },
        f"{target.ramble_id}: {target.text}",
    )


@main.command("keywords")
@click.argument("doc_id")
@click.argument("ramble_id")
@click.option("--toggle", "word", default=None, help="Word to toggle.")
@click.pass_obj
def cmd_keywords(app: Context, doc_id, ramble_id, word):
    """List a ramble's keywords, optionally toggling one first."""
    with app.lock():
        try:
            doc = app.store.get(doc_id)
            ramble = doc.get_ramble(ramble_id)
            if word is not None:
                doc.toggle_keyword(ramble_id, word)
                app.engine.pregenerate(ramble).wait()
                app.store.persist(doc_id)
        except BadRequestError as exc:
            raise click.UsageError(str(exc))
        except RamblekitError as exc:
            _fail(str(exc))
    entries = [
        {
            "word": e.word,
            "source": e.source.value,
            "active": e.active,
            "score": e.score,
        }
        for e in ramble.keywords.entries()
    ]
    lines = [
        f"{'*' if e['active'] else ' '} {e['word']} "
        f"({e['source']}, {e['score']:.2f})"
        for e in entries
    ]
    app.emit({"keywords": entries, "active": ramble.active_keywords()},
             "\n".join(lines) or "(no keywords)")


@main.command("transform")
@click.argument("doc_id")
@click.argument("ramble_id")
@click.option("--prompt", required=True, help="Instruction to apply.")
@click.option("--include-keywords", is_flag=True,
              help="Name the active keywords in the prompt.")
@click.option("--apply", "apply_result", is_flag=True,
              help="Commit the result instead of just printing it.")
@click.pass_obj
def cmd_transform(app: Context, doc_id, ramble_id, prompt, include_keywords,
                  apply_result):
    """Run a custom prompt against a ramble; prints the candidate text."""
    with app.lock():
        try:
            doc = app.store.get(doc_id)
            ramble = doc.get_ramble(ramble_id)
            candidate = app.engine.custom_transform(
                ramble.text,
                prompt,
                keywords=tuple(ramble.active_keywords()),
                include_keywords=include_keywords,
            )
            if apply_result:
                doc.commit_text(ramble_id, candidate)
                app.engine.pregenerate(ramble).wait()
                app.store.persist(doc_id)
        except BadRequestError as exc:
            raise click.UsageError(str(exc))
        except RamblekitError as exc:
            _fail(str(exc))
    app.emit(
        {
            "candidate_text": candidate,
            "applied": apply_result,
            "revision": doc.revision,
        },
        candidate,
    )


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_obj
def cmd_serve(app: Context, host, port):
    """Serve the HTTP API over the store directory."""
    import uvicorn

    from ramblekit.service import create_app

    uvicorn.run(create_app(app.store, app.engine), host=host, port=port)


if __name__ == "__main__":
    main()
