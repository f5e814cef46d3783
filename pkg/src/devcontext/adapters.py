"""Adapters from raw export formats to canonical JSONL.

Two inputs are supported: a per-commit plain-text log with status-tagged file
lists, and a Bugzilla-style XML issue export. Adapters only ever emit lines
that the canonical parsers accept.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO

from .corpus import serialize_revisions, serialize_tasks
from .records import ChangedPath, Comment, RevisionRecord, TaskRecord
from .records import normalize_path, parse_rfc3339

STATUS_TO_KIND = {"A": "added", "M": "modified", "D": "deleted"}

TASK_ID_PREFIX = "task-"


class AdapterError(Exception):
    """Raw input could not be adapted; message carries the location."""


@dataclass
class AdapterReport:
    """What an adapter did, for the operator's eyes (stderr, not stdout)."""

    records_emitted: int = 0
    records_dropped: int = 0
    paths_skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def to_obj(self) -> dict:
        return {
            "records_emitted": self.records_emitted,
            "records_dropped": self.records_dropped,
            "paths_skipped": self.paths_skipped,
            "warnings": self.warnings,
        }


def _unescape_message(raw: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            nxt = raw[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _read_text(stream: IO[bytes] | IO[str]) -> str:
    data = stream.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def adapt_vcs_log(stream: IO[bytes] | IO[str]) -> tuple[str, AdapterReport]:
    """Convert a per-commit log to canonical revision JSONL.

    Blocks are separated by blank lines:

        commit <id>
        author <name>
        date <RFC3339>
        message <single line, \\n/\\t/\\\\ escapes>
        <STATUS>\\t<path>      (one per file; A/M/D recognized)

    Unknown status letters skip that path with a warning; a commit left with
    no paths is dropped and counted.
    """
    report = AdapterReport()
    records: list[RevisionRecord] = []
    seen_ids: set[str] = set()

    lines = _read_text(stream).split("\n")
    block: list[tuple[int, str]] = []
    blocks: list[list[tuple[int, str]]] = []
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            block.append((lineno, line))
        elif block:
            blocks.append(block)
            block = []
    if block:
        blocks.append(block)

    for blk in blocks:
        headers = {}
        start_line = blk[0][0]
        if len(blk) < 4:
            raise AdapterError(f"line {start_line}: incomplete commit block")
        for (lineno, line), key in zip(blk[:4], ("commit", "author", "date", "message")):
            prefix = key + " "
            if not line.startswith(prefix):
                raise AdapterError(f"line {lineno}: expected '{key} <value>'")
            headers[key] = line[len(prefix):]
        rid = headers["commit"].strip()
        if not rid:
            raise AdapterError(f"line {start_line}: empty commit id")
        if rid in seen_ids:
            raise AdapterError(f"line {start_line}: duplicate commit id {rid!r}")
        seen_ids.add(rid)
        try:
            when = parse_rfc3339(headers["date"].strip())
        except ValueError as exc:
            raise AdapterError(f"line {start_line}: {exc}") from exc

        changed: list[ChangedPath] = []
        for lineno, line in blk[4:]:
            status, sep, path = line.partition("\t")
            if not sep or not path.strip():
                raise AdapterError(f"line {lineno}: expected '<STATUS>\\t<path>'")
            kind = STATUS_TO_KIND.get(status.strip())
            if kind is None:
                report.paths_skipped += 1
                report.warn(
                    f"line {lineno}: unrecognized status {status.strip()!r},"
                    f" skipped {path.strip()!r}"
                )
                continue
            norm = normalize_path(path.strip())
            if any(cp.path == norm for cp in changed):
                report.paths_skipped += 1
                report.warn(
                    f"line {lineno}: path {norm!r} listed twice in commit"
                    f" {rid!r}, kept the first entry"
                )
                continue
            changed.append(ChangedPath(path=norm, change_kind=kind))
        if not changed:
            report.records_dropped += 1
            report.warn(f"line {start_line}: commit {rid!r} has no usable paths, dropped")
            continue
        records.append(
            RevisionRecord(
                revision_id=rid,
                author=headers["author"].strip(),
                timestamp=when,
                message=_unescape_message(headers["message"]),
                changed_paths=tuple(changed),
            )
        )
        report.records_emitted += 1

    return serialize_revisions(records), report


def _byte_offset(text: str, line: int, column: int) -> int:
    lines = text.split("\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


_ISSUE_TS_FORMATS = ("%Y-%m-%d %H:%M:%S %z", "%Y-%m-%d %H:%M:%S")


def _parse_issue_timestamp(value: str) -> datetime:
    value = value.strip()
    try:
        return parse_rfc3339(value)
    except ValueError:
        pass
    for fmt in _ISSUE_TS_FORMATS:
        try:
            parsed = datetime.strptime(value, fmt)
        except ValueError:
            continue
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return parsed.astimezone(timezone.utc)
    raise ValueError(f"unparseable timestamp {value!r}")


def _text_of(element: ET.Element | None) -> str:
    if element is None or element.text is None:
        return ""
    return element.text.strip()


def adapt_issue_export(stream: IO[bytes] | IO[str]) -> tuple[str, AdapterReport]:
    """Convert a tracker XML export to canonical task JSONL.

    The recognized subset: any root element containing ``<bug>`` children,
    each with ``<bug_id>`` (required), ``<short_desc>``, ``<assigned_to>``,
    ``<bug_status>``, and zero or more ``<long_desc>`` children holding
    ``<who>``, ``<bug_when>``, ``<thetext>``. Long descriptions become
    comments in document order.
    """
    report = AdapterReport()
    text = _read_text(stream)
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        offset = _byte_offset(text, line, column)
        raise AdapterError(
            f"malformed XML at byte {offset} (line {line}, column {column}): {exc.msg}"
        ) from exc

    records: list[TaskRecord] = []
    seen: set[str] = set()
    for index, bug in enumerate(root.iter("bug")):
        ext = _text_of(bug.find("bug_id"))
        if not ext:
            raise AdapterError(f"issue #{index + 1} in document order is missing bug_id")
        if ext in seen:
            raise AdapterError(f"duplicate bug_id {ext!r}")
        seen.add(ext)

        assigned = bug.find("assigned_to")
        if assigned is None:
            report.warn(f"bug {ext}: no assignee, left empty")
            assignee = ""
        else:
            assignee = _text_of(assigned)

        comments: list[Comment] = []
        for ci, desc in enumerate(bug.findall("long_desc")):
            when_text = _text_of(desc.find("bug_when"))
            if not when_text:
                report.warn(f"bug {ext}: comment {ci} has no timestamp, skipped")
                continue
            try:
                when = _parse_issue_timestamp(when_text)
            except ValueError as exc:
                report.warn(f"bug {ext}: comment {ci}: {exc}, skipped")
                continue
            comments.append(
                Comment(
                    author=_text_of(desc.find("who")),
                    timestamp=when,
                    text=_text_of(desc.find("thetext")),
                )
            )

        records.append(
            TaskRecord(
                task_id=TASK_ID_PREFIX + ext,
                external_id=ext,
                assignee=assignee,
                summary=_text_of(bug.find("short_desc")),
                status=_text_of(bug.find("bug_status")),
                comments=tuple(sorted(comments, key=lambda c: c.timestamp)),
            )
        )
        report.records_emitted += 1

    return serialize_tasks(records), report
