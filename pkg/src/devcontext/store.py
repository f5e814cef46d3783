"""Entity and relation store with versioned snapshot persistence.

The store is a typed property graph over four entity collections plus a
relation table keyed by (kind, source, target). It is written by ingest and
extraction, then frozen into a gzip-compressed JSON snapshot; a loaded
snapshot is treated as immutable and served read-only.

Serialization is deterministic: sorted object keys, entity arrays sorted by
id, gzip mtime pinned to zero. The same corpus and config always produce the
same snapshot bytes.
"""

from __future__ import annotations

import gzip
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from ._version import __version__
from .identity import ITS, VCS, IdentityMap, display_name_for, resolve_identity
from .matching import MatchConfig, derive_resource_names
from .records import (
    Comment,
    RevisionRecord,
    TaskRecord,
    format_rfc3339,
    normalize_path,
    parse_rfc3339,
)

FORMAT_VERSION = 1

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class StoreError(Exception):
    """A store operation violated a structural rule."""


class SnapshotError(Exception):
    """A snapshot file could not be used."""


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotIntegrityError(SnapshotError):
    pass


class RelationKind(Enum):
    AUTHORED_REVISION = "authored_revision"
    ASSIGNED_TASK = "assigned_task"
    RESOURCE_TASK_SUMMARY = "resource_task_summary"
    RESOURCE_TASK_COMMENT = "resource_task_comment"
    TASK_REVISION = "task_revision"
    COCHANGE = "cochange"
    DEV_PROXIMITY = "dev_proximity"


KIND_ORDER = {kind: i for i, kind in enumerate(RelationKind)}

UNDIRECTED_KINDS = frozenset({RelationKind.COCHANGE, RelationKind.DEV_PROXIMITY})

EXTRACTED_KINDS = (
    RelationKind.RESOURCE_TASK_SUMMARY,
    RelationKind.RESOURCE_TASK_COMMENT,
    RelationKind.TASK_REVISION,
    RelationKind.COCHANGE,
    RelationKind.DEV_PROXIMITY,
)

# kind -> (source collection, target collection)
ENDPOINT_DOMAINS = {
    RelationKind.AUTHORED_REVISION: ("developers", "revisions"),
    RelationKind.ASSIGNED_TASK: ("developers", "tasks"),
    RelationKind.RESOURCE_TASK_SUMMARY: ("resources", "tasks"),
    RelationKind.RESOURCE_TASK_COMMENT: ("resources", "tasks"),
    RelationKind.TASK_REVISION: ("tasks", "revisions"),
    RelationKind.COCHANGE: ("resources", "resources"),
    RelationKind.DEV_PROXIMITY: ("developers", "developers"),
}


@dataclass(frozen=True)
class Evidence:
    description: str
    locator: str


def revision_locator(revision_id: str, offset: int | None = None) -> str:
    if offset is None:
        return f"revision/{revision_id}"
    return f"revision/{revision_id}/message@{offset}"


def task_locator(task_id: str) -> str:
    return f"task/{task_id}"


def summary_locator(task_id: str, offset: int) -> str:
    return f"task/{task_id}/summary@{offset}"


def comment_locator(task_id: str, index: int, offset: int) -> str:
    return f"task/{task_id}/comment/{index}@{offset}"


def resource_locator(resource_id: str) -> str:
    return f"resource/{resource_id}"


@dataclass
class Developer:
    developer_id: str
    display_name: str
    vcs_authors: set[str] = field(default_factory=set)
    its_accounts: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class Resource:
    resource_id: str
    path: str
    file_name: str
    class_name: str | None
    fqn: str | None
    is_source: bool


@dataclass(frozen=True)
class Revision:
    revision_id: str
    developer_id: str
    author: str
    timestamp: datetime
    message: str
    changed: tuple[tuple[str, str], ...]  # (resource_id, change_kind)


@dataclass(frozen=True)
class Task:
    task_id: str
    external_id: str
    developer_id: str
    assignee: str
    summary: str
    status: str
    comments: tuple[Comment, ...]


@dataclass
class Relation:
    kind: RelationKind
    source_id: str
    target_id: str
    weight: int
    evidence: list[Evidence]


@dataclass
class Provenance:
    created_at: str
    tool_version: str
    config_hash: str


@dataclass
class IngestReport:
    developers: int = 0
    resources: int = 0
    revisions: int = 0
    tasks: int = 0
    relations: int = 0

    def to_obj(self) -> dict:
        return {
            "developers": self.developers,
            "resources": self.resources,
            "revisions": self.revisions,
            "tasks": self.tasks,
            "relations": self.relations,
        }


def make_resource(path: str, cfg: MatchConfig) -> Resource:
    resource_id = normalize_path(path)
    file_name, class_name, fqn = derive_resource_names(resource_id, cfg)
    return Resource(
        resource_id=resource_id,
        path=resource_id,
        file_name=file_name,
        class_name=class_name,
        fqn=fqn,
        is_source=class_name is not None,
    )


def developer_obj(d: Developer) -> dict:
    return {
        "developer_id": d.developer_id,
        "display_name": d.display_name,
        "vcs_authors": sorted(d.vcs_authors),
        "its_accounts": sorted(d.its_accounts),
    }


def resource_obj(r: Resource) -> dict:
    return {
        "resource_id": r.resource_id,
        "path": r.path,
        "file_name": r.file_name,
        "class_name": r.class_name,
        "fqn": r.fqn,
        "is_source": r.is_source,
    }


def revision_obj(rev: Revision) -> dict:
    return {
        "revision_id": rev.revision_id,
        "developer_id": rev.developer_id,
        "author": rev.author,
        "timestamp": format_rfc3339(rev.timestamp),
        "message": rev.message,
        "changed": [
            {"resource_id": rid, "change_kind": kind} for rid, kind in rev.changed
        ],
    }


def task_obj(t: Task) -> dict:
    return {
        "task_id": t.task_id,
        "external_id": t.external_id,
        "developer_id": t.developer_id,
        "assignee": t.assignee,
        "summary": t.summary,
        "status": t.status,
        "comments": [
            {
                "author": c.author,
                "timestamp": format_rfc3339(c.timestamp),
                "text": c.text,
            }
            for c in t.comments
        ],
    }


def relation_obj(rel: Relation) -> dict:
    return {
        "kind": rel.kind.value,
        "source_id": rel.source_id,
        "target_id": rel.target_id,
        "weight": rel.weight,
        "evidence": [
            {"description": e.description, "locator": e.locator}
            for e in rel.evidence
        ],
    }


class StoreIndex:
    """Adjacency maps rebuilt after mutation; queries are index lookups."""

    def __init__(self, store: "ContextStore"):
        self.by_source: dict[str, list[Relation]] = {}
        self.by_target: dict[str, list[Relation]] = {}
        for key in sorted(store.relations):
            rel = store.relations[key]
            self.by_source.setdefault(rel.source_id, []).append(rel)
            self.by_target.setdefault(rel.target_id, []).append(rel)

        self.resource_revisions: dict[str, list[Revision]] = {}
        self.developer_revisions: dict[str, list[Revision]] = {}
        for rev in sorted(store.revisions.values(), key=lambda r: r.revision_id):
            for resource_id, _ in rev.changed:
                self.resource_revisions.setdefault(resource_id, []).append(rev)
            if rev.developer_id:
                self.developer_revisions.setdefault(rev.developer_id, []).append(rev)

        self.developer_tasks: dict[str, list[Task]] = {}
        for task in sorted(store.tasks.values(), key=lambda t: t.task_id):
            if task.developer_id:
                self.developer_tasks.setdefault(task.developer_id, []).append(task)

    def relations_at(self, entity_id: str) -> list[Relation]:
        return self.by_source.get(entity_id, []) + self.by_target.get(entity_id, [])


def task_time(task: Task) -> datetime | None:
    """Last activity on a task: its latest comment, if any."""
    if not task.comments:
        return None
    return max(c.timestamp for c in task.comments)


class ContextStore:
    def __init__(self):
        self.developers: dict[str, Developer] = {}
        self.resources: dict[str, Resource] = {}
        self.revisions: dict[str, Revision] = {}
        self.tasks: dict[str, Task] = {}
        self.relations: dict[tuple[str, str, str], Relation] = {}
        self.provenance = Provenance(
            created_at=format_rfc3339(EPOCH),
            tool_version=__version__,
            config_hash="",
        )
        self._index: StoreIndex | None = None

    # -- entity management -------------------------------------------------

    def _dirty(self) -> None:
        self._index = None

    @property
    def index(self) -> StoreIndex:
        if self._index is None:
            self._index = StoreIndex(self)
        return self._index

    def add_resource(self, path: str, cfg: MatchConfig) -> Resource:
        resource = make_resource(path, cfg)
        existing = self.resources.get(resource.resource_id)
        if existing is not None:
            return existing
        self.resources[resource.resource_id] = resource
        self._dirty()
        return resource

    def ensure_developer(self, raw: str, source: str, identity: IdentityMap) -> str:
        developer_id = resolve_identity(raw, source, identity)
        dev = self.developers.get(developer_id)
        if dev is None:
            dev = Developer(
                developer_id=developer_id,
                display_name=display_name_for(developer_id),
            )
            self.developers[developer_id] = dev
            self._dirty()
        aliases = dev.vcs_authors if source == VCS else dev.its_accounts
        aliases.add(raw)
        return developer_id

    def put_entities(
        self,
        revisions: list[RevisionRecord] = (),
        tasks: list[TaskRecord] = (),
        identity: IdentityMap | None = None,
        cfg: MatchConfig | None = None,
    ) -> IngestReport:
        """Load records: entities, plus the explicit authored/assigned edges.

        Re-ingesting the same records is a no-op; the same id with different
        content is rejected. Empty author/assignee strings simply produce no
        developer edge.
        """
        identity = identity or IdentityMap()
        cfg = cfg or MatchConfig()
        report = IngestReport()
        before = {
            "developers": len(self.developers),
            "resources": len(self.resources),
            "relations": len(self.relations),
        }

        for rec in revisions:
            rec.validate()
            changed = tuple(
                (normalize_path(cp.path), cp.change_kind) for cp in rec.changed_paths
            )
            developer_id = ""
            if rec.author.strip():
                developer_id = self.ensure_developer(rec.author, VCS, identity)
            revision = Revision(
                revision_id=rec.revision_id,
                developer_id=developer_id,
                author=rec.author,
                timestamp=rec.timestamp,
                message=rec.message,
                changed=changed,
            )
            existing = self.revisions.get(rec.revision_id)
            if existing is not None:
                if existing != revision:
                    raise StoreError(
                        f"revision {rec.revision_id!r} already stored with"
                        " different content"
                    )
            else:
                self.revisions[rec.revision_id] = revision
                report.revisions += 1
                self._dirty()
            for cp in rec.changed_paths:
                self.add_resource(cp.path, cfg)
            if developer_id:
                self.upsert_relation(
                    RelationKind.AUTHORED_REVISION,
                    developer_id,
                    rec.revision_id,
                    Evidence(
                        description=f'committed as "{rec.author}"',
                        locator=revision_locator(rec.revision_id),
                    ),
                )

        for rec in tasks:
            rec.validate()
            developer_id = ""
            if rec.assignee.strip():
                developer_id = self.ensure_developer(rec.assignee, ITS, identity)
            task = Task(
                task_id=rec.task_id,
                external_id=rec.external_id,
                developer_id=developer_id,
                assignee=rec.assignee,
                summary=rec.summary,
                status=rec.status,
                comments=rec.comments,
            )
            existing = self.tasks.get(rec.task_id)
            if existing is not None:
                if existing != task:
                    raise StoreError(
                        f"task {rec.task_id!r} already stored with different content"
                    )
            else:
                self.tasks[rec.task_id] = task
                report.tasks += 1
                self._dirty()
            if developer_id:
                self.upsert_relation(
                    RelationKind.ASSIGNED_TASK,
                    developer_id,
                    rec.task_id,
                    Evidence(
                        description=f'assigned to "{rec.assignee}"',
                        locator=task_locator(rec.task_id),
                    ),
                )

        report.developers = len(self.developers) - before["developers"]
        report.resources = len(self.resources) - before["resources"]
        report.relations = len(self.relations) - before["relations"]
        self._refresh_created_at()
        return report

    def _refresh_created_at(self) -> None:
        # Derived from corpus content, not the wall clock, so that two runs
        # over the same inputs produce byte-identical snapshots.
        stamps = [rev.timestamp for rev in self.revisions.values()]
        for task in self.tasks.values():
            stamps.extend(c.timestamp for c in task.comments)
        self.provenance.created_at = format_rfc3339(max(stamps, default=EPOCH))

    # -- relations ----------------------------------------------------------

    def _check_endpoint(self, collection: str, entity_id: str) -> None:
        table: dict = getattr(self, collection)
        if entity_id not in table:
            raise StoreError(f"unknown {collection[:-1]} {entity_id!r}")

    def upsert_relation(
        self,
        kind: RelationKind,
        source_id: str,
        target_id: str,
        evidence: Evidence,
    ) -> Relation:
        """Create the relation or add one more piece of evidence to it.

        Undirected kinds are stored with endpoints in lexicographic order and
        reject self-edges. Re-adding identical evidence is a no-op, which
        keeps re-ingestion idempotent.
        """
        if kind in UNDIRECTED_KINDS:
            if source_id == target_id:
                raise StoreError(f"{kind.value} self-edge on {source_id!r} rejected")
            if target_id < source_id:
                source_id, target_id = target_id, source_id
        src_coll, tgt_coll = ENDPOINT_DOMAINS[kind]
        self._check_endpoint(src_coll, source_id)
        self._check_endpoint(tgt_coll, target_id)

        key = (kind.value, source_id, target_id)
        rel = self.relations.get(key)
        if rel is None:
            rel = Relation(
                kind=kind,
                source_id=source_id,
                target_id=target_id,
                weight=1,
                evidence=[evidence],
            )
            self.relations[key] = rel
            self._dirty()
            return rel
        if evidence in rel.evidence:
            return rel
        rel.evidence.append(evidence)
        rel.weight += 1
        self._dirty()
        return rel

    def drop_relations(self, kinds: set[RelationKind]) -> None:
        values = {k.value for k in kinds}
        keys = [key for key in self.relations if key[0] in values]
        for key in keys:
            del self.relations[key]
        if keys:
            self._dirty()

    def relations_of_kind(self, kind: RelationKind) -> list[Relation]:
        return [
            self.relations[key]
            for key in sorted(self.relations)
            if key[0] == kind.value
        ]

    def relation_counts(self) -> dict[str, int]:
        counts = {kind.value: 0 for kind in RelationKind}
        for key in self.relations:
            counts[key[0]] += 1
        return counts

    def entity_counts(self) -> dict[str, int]:
        return {
            "developers": len(self.developers),
            "resources": len(self.resources),
            "revisions": len(self.revisions),
            "tasks": len(self.tasks),
            "relations": len(self.relations),
        }

    def verify_integrity(self) -> None:
        """Full-scan check of the structural invariants; raises on violation."""
        for rel in self.relations.values():
            src_coll, tgt_coll = ENDPOINT_DOMAINS[rel.kind]
            self._check_endpoint(src_coll, rel.source_id)
            self._check_endpoint(tgt_coll, rel.target_id)
            if rel.kind in UNDIRECTED_KINDS:
                if rel.source_id >= rel.target_id:
                    raise StoreError(
                        f"{rel.kind.value} endpoints out of canonical order:"
                        f" {rel.source_id!r}, {rel.target_id!r}"
                    )
            if rel.weight != len(rel.evidence):
                raise StoreError(
                    f"{rel.kind.value} {rel.source_id!r}->{rel.target_id!r}:"
                    f" weight {rel.weight} != evidence count {len(rel.evidence)}"
                )
            if rel.weight < 1:
                raise StoreError("relation weight must be >= 1")
        for task in self.tasks.values():
            times = [c.timestamp for c in task.comments]
            if times != sorted(times):
                raise StoreError(f"task {task.task_id!r} comments out of order")
        for rev in self.revisions.values():
            ids = [resource_id for resource_id, _ in rev.changed]
            if len(ids) != len(set(ids)):
                raise StoreError(
                    f"revision {rev.revision_id!r} lists a resource twice"
                )
            for resource_id in ids:
                self._check_endpoint("resources", resource_id)

    # -- equality -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContextStore):
            return NotImplemented
        return (
            self.developers == other.developers
            and self.resources == other.resources
            and self.revisions == other.revisions
            and self.tasks == other.tasks
            and self.relations == other.relations
            and self.provenance == other.provenance
        )

    # -- serialization ------------------------------------------------------

    def to_obj(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "provenance": {
                "created_at": self.provenance.created_at,
                "tool_version": self.provenance.tool_version,
                "config_hash": self.provenance.config_hash,
            },
            "developers": [
                developer_obj(d)
                for d in sorted(self.developers.values(), key=lambda d: d.developer_id)
            ],
            "resources": [
                resource_obj(r)
                for r in sorted(self.resources.values(), key=lambda r: r.resource_id)
            ],
            "revisions": [
                revision_obj(rev)
                for rev in sorted(self.revisions.values(), key=lambda r: r.revision_id)
            ],
            "tasks": [
                task_obj(t)
                for t in sorted(self.tasks.values(), key=lambda t: t.task_id)
            ],
            "relations": [
                relation_obj(rel) for key, rel in sorted(self.relations.items())
            ],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ContextStore":
        version = obj.get("format_version")
        if version != FORMAT_VERSION:
            raise SnapshotVersionError(
                f"snapshot format_version {version!r} is not supported"
                f" (expected {FORMAT_VERSION})"
            )
        store = cls()
        try:
            prov = obj["provenance"]
            store.provenance = Provenance(
                created_at=prov["created_at"],
                tool_version=prov["tool_version"],
                config_hash=prov["config_hash"],
            )
            for d in obj["developers"]:
                store.developers[d["developer_id"]] = Developer(
                    developer_id=d["developer_id"],
                    display_name=d["display_name"],
                    vcs_authors=set(d["vcs_authors"]),
                    its_accounts=set(d["its_accounts"]),
                )
            for r in obj["resources"]:
                store.resources[r["resource_id"]] = Resource(
                    resource_id=r["resource_id"],
                    path=r["path"],
                    file_name=r["file_name"],
                    class_name=r["class_name"],
                    fqn=r["fqn"],
                    is_source=r["is_source"],
                )
            for rev in obj["revisions"]:
                store.revisions[rev["revision_id"]] = Revision(
                    revision_id=rev["revision_id"],
                    developer_id=rev["developer_id"],
                    author=rev["author"],
                    timestamp=parse_rfc3339(rev["timestamp"]),
                    message=rev["message"],
                    changed=tuple(
                        (c["resource_id"], c["change_kind"]) for c in rev["changed"]
                    ),
                )
            for t in obj["tasks"]:
                store.tasks[t["task_id"]] = Task(
                    task_id=t["task_id"],
                    external_id=t["external_id"],
                    developer_id=t["developer_id"],
                    assignee=t["assignee"],
                    summary=t["summary"],
                    status=t["status"],
                    comments=tuple(
                        Comment(
                            author=c["author"],
                            timestamp=parse_rfc3339(c["timestamp"]),
                            text=c["text"],
                        )
                        for c in t["comments"]
                    ),
                )
            for rel in obj["relations"]:
                kind = RelationKind(rel["kind"])
                store.relations[(kind.value, rel["source_id"], rel["target_id"])] = (
                    Relation(
                        kind=kind,
                        source_id=rel["source_id"],
                        target_id=rel["target_id"],
                        weight=rel["weight"],
                        evidence=[
                            Evidence(
                                description=e["description"], locator=e["locator"]
                            )
                            for e in rel["evidence"]
                        ],
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotIntegrityError(f"snapshot structure invalid: {exc}") from exc
        store.verify_integrity()
        return store

    def save_snapshot(self, path: str) -> None:
        """Write the snapshot atomically: temp file in place, then rename."""
        payload = json.dumps(
            self.to_obj(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
        ).encode("utf-8")
        compressed = gzip.compress(payload, mtime=0)
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(compressed)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load_snapshot(cls, path: str) -> "ContextStore":
        try:
            with gzip.open(path, "rb") as fh:
                payload = fh.read()
        except (OSError, EOFError, gzip.BadGzipFile) as exc:
            raise SnapshotIntegrityError(f"cannot read snapshot {path}: {exc}") from exc
        try:
            obj = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SnapshotIntegrityError(
                f"snapshot {path} is not valid JSON: {exc}"
            ) from exc
        if not isinstance(obj, dict):
            raise SnapshotIntegrityError(f"snapshot {path} has no top-level object")
        return cls.from_obj(obj)

    def copy(self) -> "ContextStore":
        return ContextStore.from_obj(self.to_obj())


def load_snapshot(path: str) -> ContextStore:
    return ContextStore.load_snapshot(path)


def refresh_resource_names(store: ContextStore, cfg: MatchConfig) -> None:
    """Re-derive stored resource name forms under a (possibly new) config."""
    for resource_id in list(store.resources):
        file_name, class_name, fqn = derive_resource_names(resource_id, cfg)
        store.resources[resource_id] = replace(
            store.resources[resource_id],
            file_name=file_name,
            class_name=class_name,
            fqn=fqn,
            is_source=class_name is not None,
        )
    store._dirty()
