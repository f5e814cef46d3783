"""Canonical JSONL interchange: strict parsing, faithful round-trips."""

import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusgen import make_corpus
from devcontext.corpus import (
    CorpusFormatError,
    parse_revisions,
    parse_tasks,
    serialize_revisions,
    serialize_tasks,
)


def test_fixture_round_trip(fixture_corpus):
    revisions, tasks, _ = fixture_corpus
    assert parse_revisions(io.StringIO(serialize_revisions(revisions))) == revisions
    assert parse_tasks(io.StringIO(serialize_tasks(tasks))) == tasks


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_generated_round_trip(seed):
    revisions, tasks, _ = make_corpus(seed, n_revisions=12, n_tasks=8, n_resources=10)
    assert parse_revisions(io.StringIO(serialize_revisions(revisions))) == revisions
    assert parse_tasks(io.StringIO(serialize_tasks(tasks))) == tasks


def test_bytes_stream_accepted(fixture_corpus, tmp_path):
    revisions, _, _ = fixture_corpus
    path = tmp_path / "r.jsonl"
    path.write_text(serialize_revisions(revisions), encoding="utf-8")
    with open(path, "rb") as fh:
        assert parse_revisions(fh) == revisions


def test_invalid_utf8_reports_line():
    stream = io.BytesIO(_good_revision_line().encode("utf-8") + b"\n\xff\xfe\n")
    with pytest.raises(CorpusFormatError, match="line 2: not UTF-8"):
        parse_revisions(stream)


def _good_revision_line(rid="r1"):
    return json.dumps(
        {
            "revision_id": rid,
            "author": "alice",
            "timestamp": "2007-03-01T10:00:00Z",
            "message": "m",
            "changed_paths": [{"path": "src/A.java", "change_kind": "modified"}],
        }
    )


def test_error_carries_line_number():
    lines = [_good_revision_line(f"r{i}") for i in range(6)]
    lines.append("{not json")
    err = None
    try:
        parse_revisions(io.StringIO("\n".join(lines) + "\n"))
    except CorpusFormatError as exc:
        err = exc
    assert err is not None
    assert err.line == 7
    assert str(err).startswith("line 7: invalid JSON")


def test_blank_lines_keep_numbering():
    text = _good_revision_line() + "\n\n[1, 2]\n"
    with pytest.raises(CorpusFormatError, match="line 3: expected a JSON object"):
        parse_revisions(io.StringIO(text))


@pytest.mark.parametrize(
    ("mutate", "message"),
    [
        (lambda o: o.pop("author"), "missing field 'author'"),
        (lambda o: o.update(message=7), "field 'message' must be str, got int"),
        (lambda o: o.update(revision_id=""), "revision_id must be non-empty"),
        (lambda o: o.update(changed_paths=[]), "changed_paths must be non-empty"),
        (lambda o: o.update(changed_paths=["src/A.java"]), "must be objects"),
        (
            lambda o: o.update(
                changed_paths=[{"path": "/abs", "change_kind": "modified"}]
            ),
            "invalid path",
        ),
        (
            lambda o: o.update(
                changed_paths=[{"path": "a\\b", "change_kind": "modified"}]
            ),
            "invalid path",
        ),
        (
            lambda o: o.update(
                changed_paths=[{"path": "src/A.java", "change_kind": "renamed"}]
            ),
            "unknown change_kind",
        ),
        (
            lambda o: o.update(timestamp="2007-03-01"),
            "not an RFC 3339 timestamp",
        ),
    ],
)
def test_revision_field_errors(mutate, message):
    obj = json.loads(_good_revision_line())
    mutate(obj)
    with pytest.raises(CorpusFormatError, match="line 1") as exc:
        parse_revisions(io.StringIO(json.dumps(obj) + "\n"))
    assert message in str(exc.value)


def test_duplicate_revision_id_names_first_line():
    text = _good_revision_line() + "\n" + _good_revision_line() + "\n"
    with pytest.raises(
        CorpusFormatError, match=r"line 2: duplicate revision_id 'r1' \(first seen on line 1\)"
    ):
        parse_revisions(io.StringIO(text))


def _good_task_obj():
    return {
        "task_id": "task-1",
        "external_id": "1",
        "assignee": "bob",
        "summary": "it crashes",
        "status": "NEW",
        "comments": [
            {"author": "c", "timestamp": "2007-03-02T09:00:00Z", "text": "later"},
            {"author": "d", "timestamp": "2007-03-01T09:00:00Z", "text": "earlier"},
        ],
    }


def test_task_comments_resorted_by_time():
    (task,) = parse_tasks(io.StringIO(json.dumps(_good_task_obj()) + "\n"))
    assert [c.text for c in task.comments] == ["earlier", "later"]
    task.validate()


def test_duplicate_task_id():
    line = json.dumps(_good_task_obj())
    with pytest.raises(CorpusFormatError, match="duplicate task_id"):
        parse_tasks(io.StringIO(line + "\n" + line + "\n"))


@pytest.mark.parametrize(
    ("mutate", "message"),
    [
        (lambda o: o.update(task_id=""), "task_id must be non-empty"),
        (lambda o: o.update(external_id=""), "external_id must be non-empty"),
        (lambda o: o.pop("status"), "missing field 'status'"),
        (lambda o: o.update(comments=[["x"]]), "must be objects"),
        (
            lambda o: o.update(comments=[{"author": "a", "timestamp": "x", "text": ""}]),
            "not an RFC 3339 timestamp",
        ),
    ],
)
def test_task_field_errors(mutate, message):
    obj = _good_task_obj()
    mutate(obj)
    with pytest.raises(CorpusFormatError) as exc:
        parse_tasks(io.StringIO(json.dumps(obj) + "\n"))
    assert message in str(exc.value)
