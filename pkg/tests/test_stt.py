"""Transcript event streams: scripted replay, capture, and the JSON
message adapter."""

import json

import pytest

from ramblekit.errors import BadRequestError
from ramblekit.stt import (
    DictationResult,
    JsonMessageSource,
    ScriptedSource,
    TranscriptEvent,
    TranscriptEventKind,
    load_script,
    run_dictation,
)


class TestScriptedSource:
    def test_partials_grow_word_by_word(self):
        source = ScriptedSource(["hello there friend"])
        events = list(source.events())
        partials = [e.text for e in events if e.kind is TranscriptEventKind.PARTIAL]
        assert partials == ["hello", "hello there", "hello there friend"]

    def test_one_final_per_utterance_then_end(self):
        source = ScriptedSource(["first utterance", "second one"])
        events = list(source.events())
        finals = [e.text for e in events if e.kind is TranscriptEventKind.FINAL]
        assert finals == ["first utterance", "second one"]
        assert events[-1].kind is TranscriptEventKind.END_OF_STREAM

    def test_partials_can_be_disabled(self):
        source = ScriptedSource(["a b c"], include_partials=False)
        kinds = [e.kind for e in source.events()]
        assert kinds == [
            TranscriptEventKind.FINAL,
            TranscriptEventKind.END_OF_STREAM,
        ]

    def test_blank_utterances_skipped(self):
        source = ScriptedSource(["  ", "real words", ""])
        finals = [
            e.text for e in source.events() if e.kind is TranscriptEventKind.FINAL
        ]
        assert finals == ["real words"]


class TestRunDictation:
    def test_finals_joined_with_single_spaces(self):
        source = ScriptedSource(["the garden was", "full of tomatoes"])
        result = run_dictation(source)
        assert result == DictationResult(text="the garden was full of tomatoes")

    def test_partials_feed_callback_only(self):
        seen = []
        source = ScriptedSource(["a b", "c"])
        result = run_dictation(source, on_partial=seen.append)
        assert seen == ["a", "a b", "c"]
        assert result.text == "a b c"

    def test_midstream_failure_keeps_buffer(self):
        class DyingSource:
            def events(self):
                yield TranscriptEvent(TranscriptEventKind.FINAL, "kept words")
                raise ConnectionError("socket closed")

        result = run_dictation(DyingSource())
        assert result.text == "kept words"
        assert result.error == "socket closed"

    def test_stops_at_end_of_stream(self):
        class ChattySource:
            def events(self):
                yield TranscriptEvent(TranscriptEventKind.FINAL, "before")
                yield TranscriptEvent(TranscriptEventKind.END_OF_STREAM)
                yield TranscriptEvent(TranscriptEventKind.FINAL, "after")

        assert run_dictation(ChattySource()).text == "before"

    def test_empty_stream(self):
        assert run_dictation(ScriptedSource([])).text == ""


class TestJsonMessageSource:
    def test_adapts_messages(self):
        messages = [
            json.dumps({"type": "partial", "text": "hel"}),
            json.dumps({"type": "final", "text": "hello"}),
            json.dumps({"type": "end"}),
        ]
        result = run_dictation(JsonMessageSource(messages))
        assert result.text == "hello"
        assert result.error is None

    def test_unknown_type_reported_not_raised_through(self):
        messages = [json.dumps({"type": "noise", "text": "x"})]
        result = run_dictation(JsonMessageSource(messages))
        assert result.error is not None
        assert "noise" in result.error

    def test_malformed_json_rejected(self):
        with pytest.raises(BadRequestError):
            list(JsonMessageSource(["{not json"]).events())


class TestLoadScript:
    def test_reads_lines_skipping_blanks(self, tmp_path):
        path = tmp_path / "script.txt"
        path.write_text("first line\n\n  second line  \n", encoding="utf-8")
        assert load_script(path) == ["first line", "second line"]
