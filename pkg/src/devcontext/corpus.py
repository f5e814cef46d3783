"""Canonical JSON Lines interchange for revisions and tasks.

One entity per line keeps exports human-diffable and streamable. Parsers are
strict: a bad line fails with its line number rather than being silently
dropped.
"""

from __future__ import annotations

import json
from typing import IO, Iterable

from .records import (
    CHANGE_KINDS,
    ChangedPath,
    Comment,
    RevisionRecord,
    TaskRecord,
    format_rfc3339,
    parse_rfc3339,
)


class CorpusFormatError(Exception):
    """A canonical JSONL stream violated the schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _iter_lines(stream: IO[bytes] | IO[str]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorpusFormatError(f"not UTF-8: {exc}", lineno) from exc
        line = raw.strip()
        if line:
            yield lineno, line


def _load_obj(lineno: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON: {exc.msg}", lineno) from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError("expected a JSON object", lineno)
    return obj


def _require(obj: dict, key: str, typ: type, lineno: int):
    if key not in obj:
        raise CorpusFormatError(f"missing field {key!r}", lineno)
    value = obj[key]
    if not isinstance(value, typ):
        raise CorpusFormatError(
            f"field {key!r} must be {typ.__name__}, got {type(value).__name__}",
            lineno,
        )
    return value


def parse_revisions(stream: IO[bytes] | IO[str]) -> list[RevisionRecord]:
    """Parse canonical revision JSONL into records, in file order."""
    records: list[RevisionRecord] = []
    seen: dict[str, int] = {}
    for lineno, line in _iter_lines(stream):
        obj = _load_obj(lineno, line)
        rid = _require(obj, "revision_id", str, lineno)
        if not rid:
            raise CorpusFormatError("revision_id must be non-empty", lineno)
        if rid in seen:
            raise CorpusFormatError(
                f"duplicate revision_id {rid!r} (first seen on line {seen[rid]})",
                lineno,
            )
        seen[rid] = lineno
        author = _require(obj, "author", str, lineno)
        try:
            timestamp = parse_rfc3339(_require(obj, "timestamp", str, lineno))
        except ValueError as exc:
            raise CorpusFormatError(str(exc), lineno) from exc
        message = _require(obj, "message", str, lineno)
        raw_paths = _require(obj, "changed_paths", list, lineno)
        if not raw_paths:
            raise CorpusFormatError("changed_paths must be non-empty", lineno)
        changed = []
        for entry in raw_paths:
            if not isinstance(entry, dict):
                raise CorpusFormatError("changed_paths entries must be objects", lineno)
            path = _require(entry, "path", str, lineno)
            kind = _require(entry, "change_kind", str, lineno)
            if not path or path.startswith("/") or "\\" in path:
                raise CorpusFormatError(f"invalid path {path!r}", lineno)
            if kind not in CHANGE_KINDS:
                raise CorpusFormatError(f"unknown change_kind {kind!r}", lineno)
            changed.append(ChangedPath(path=path, change_kind=kind))
        records.append(
            RevisionRecord(
                revision_id=rid,
                author=author,
                timestamp=timestamp,
                message=message,
                changed_paths=tuple(changed),
            )
        )
    return records


def parse_tasks(stream: IO[bytes] | IO[str]) -> list[TaskRecord]:
    """Parse canonical task JSONL; out-of-order comments are re-sorted."""
    records: list[TaskRecord] = []
    seen: dict[str, int] = {}
    for lineno, line in _iter_lines(stream):
        obj = _load_obj(lineno, line)
        tid = _require(obj, "task_id", str, lineno)
        if not tid:
            raise CorpusFormatError("task_id must be non-empty", lineno)
        if tid in seen:
            raise CorpusFormatError(
                f"duplicate task_id {tid!r} (first seen on line {seen[tid]})", lineno
            )
        seen[tid] = lineno
        ext = _require(obj, "external_id", str, lineno)
        if not ext:
            raise CorpusFormatError("external_id must be non-empty", lineno)
        assignee = _require(obj, "assignee", str, lineno)
        summary = _require(obj, "summary", str, lineno)
        status = _require(obj, "status", str, lineno)
        comments = []
        for entry in _require(obj, "comments", list, lineno):
            if not isinstance(entry, dict):
                raise CorpusFormatError("comments entries must be objects", lineno)
            try:
                when = parse_rfc3339(_require(entry, "timestamp", str, lineno))
            except ValueError as exc:
                raise CorpusFormatError(str(exc), lineno) from exc
            comments.append(
                Comment(
                    author=_require(entry, "author", str, lineno),
                    timestamp=when,
                    text=_require(entry, "text", str, lineno),
                )
            )
        comments.sort(key=lambda c: c.timestamp)
        records.append(
            TaskRecord(
                task_id=tid,
                external_id=ext,
                assignee=assignee,
                summary=summary,
                status=status,
                comments=tuple(comments),
            )
        )
    return records


def revision_to_obj(rec: RevisionRecord) -> dict:
    return {
        "revision_id": rec.revision_id,
        "author": rec.author,
        "timestamp": format_rfc3339(rec.timestamp),
        "message": rec.message,
        "changed_paths": [
            {"path": cp.path, "change_kind": cp.change_kind}
            for cp in rec.changed_paths
        ],
    }


def task_to_obj(rec: TaskRecord) -> dict:
    return {
        "task_id": rec.task_id,
        "external_id": rec.external_id,
        "assignee": rec.assignee,
        "summary": rec.summary,
        "status": rec.status,
        "comments": [
            {
                "author": c.author,
                "timestamp": format_rfc3339(c.timestamp),
                "text": c.text,
            }
            for c in rec.comments
        ],
    }


def serialize_revisions(records: Iterable[RevisionRecord]) -> str:
    return "".join(
        json.dumps(revision_to_obj(r), ensure_ascii=False) + "\n" for r in records
    )


def serialize_tasks(records: Iterable[TaskRecord]) -> str:
    return "".join(
        json.dumps(task_to_obj(r), ensure_ascii=False) + "\n" for r in records
    )
