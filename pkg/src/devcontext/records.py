"""Corpus-level records: revisions and tasks as they arrive from exports."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

CHANGE_KINDS = ("added", "modified", "deleted")

_RFC3339 = re.compile(
    r"^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime.

    Fractions count any number of digits but are kept at microsecond
    precision. Raises ValueError for anything else, including naive
    timestamps.
    """
    m = _RFC3339.match(value) if isinstance(value, str) else None
    if not m:
        raise ValueError(f"not an RFC 3339 timestamp: {value!r}")
    frac, zone = m.group(1), m.group(2)
    micro = f".{(frac[1:] + '000000')[:6]}" if frac else ""
    zone = "+00:00" if zone in ("Z", "z") else zone
    normalized = value[:19].replace(" ", "T", 1) + micro + zone
    return datetime.fromisoformat(normalized).astimezone(timezone.utc)


def format_rfc3339(ts: datetime) -> str:
    """Render an aware datetime as RFC 3339 UTC (``Z`` suffix)."""
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def normalize_path(path: str) -> str:
    """Repository path normal form: "/"-separated, no leading "/", case kept."""
    p = path.replace("\\", "/")
    while "//" in p:
        p = p.replace("//", "/")
    return p.strip("/")


@dataclass(frozen=True)
class ChangedPath:
    path: str
    change_kind: str


@dataclass(frozen=True)
class Comment:
    author: str
    timestamp: datetime
    text: str


@dataclass(frozen=True)
class RevisionRecord:
    """One changeset: a developer applied changes to a set of paths."""

    revision_id: str
    author: str
    timestamp: datetime
    message: str
    changed_paths: tuple[ChangedPath, ...]

    def validate(self) -> None:
        if not self.revision_id:
            raise ValueError("revision_id must be non-empty")
        if not self.changed_paths:
            raise ValueError(f"revision {self.revision_id!r} has no changed paths")
        seen = set()
        for cp in self.changed_paths:
            if not cp.path or cp.path.startswith("/") or "\\" in cp.path:
                raise ValueError(
                    f"revision {self.revision_id!r}: invalid path {cp.path!r}"
                )
            if cp.change_kind not in CHANGE_KINDS:
                raise ValueError(
                    f"revision {self.revision_id!r}: unknown change kind"
                    f" {cp.change_kind!r}"
                )
            norm = normalize_path(cp.path)
            if norm in seen:
                raise ValueError(
                    f"revision {self.revision_id!r}: duplicate path {norm!r}"
                )
            seen.add(norm)


@dataclass(frozen=True)
class TaskRecord:
    """One issue-tracker entry: a problem report and its discussion."""

    task_id: str
    external_id: str
    assignee: str
    summary: str
    status: str
    comments: tuple[Comment, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if not self.task_id:
            raise ValueError("task_id must be non-empty")
        if not self.external_id:
            raise ValueError(f"task {self.task_id!r}: external_id must be non-empty")
        times = [c.timestamp for c in self.comments]
        if times != sorted(times):
            raise ValueError(f"task {self.task_id!r}: comments out of order")
