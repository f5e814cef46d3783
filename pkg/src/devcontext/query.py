"""Ranked "context of entity X" views and entity search.

A view has three sections (developers, resources, tasks). Section membership
follows fixed per-focus rules: direct relations plus the specific two-step
paths documented on each builder, never generic graph walks. Entry scores sum
the weights of contributing relations (optionally rescaled per kind via
QueryConfig); ties break by latest evidence timestamp (newest first, undated
last), then entity id. All reads go through the store index, so queries on a
loaded snapshot stay fast and allocation-light.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable

from .records import format_rfc3339
from .store import (
    ContextStore,
    Evidence,
    Relation,
    RelationKind,
    developer_obj,
    resource_obj,
    revision_locator,
    revision_obj,
    task_obj,
    task_time,
)

KIND_DEVELOPER = "developer"
KIND_RESOURCE = "resource"
KIND_TASK = "task"
KIND_REVISION = "revision"
FOCUS_KINDS = (KIND_DEVELOPER, KIND_RESOURCE, KIND_TASK)
SEARCH_KINDS = FOCUS_KINDS
ENTITY_KINDS = FOCUS_KINDS + (KIND_REVISION,)

DEFAULT_SECTION_SIZE = 10
DEFAULT_SEARCH_LIMIT = 20


class EntityNotFoundError(Exception):
    def __init__(self, kind: str, entity_id: str):
        super().__init__(f"{kind} not found: {entity_id}")
        self.kind = kind
        self.entity_id = entity_id


@dataclass
class QueryConfig:
    """Ranking knobs. Multipliers rescale relation weights per kind."""

    multipliers: dict[str, float] = field(default_factory=dict)

    def factor(self, kind: RelationKind) -> float:
        return float(self.multipliers.get(kind.value, 1.0))

    @classmethod
    def from_obj(cls, obj: dict) -> "QueryConfig":
        multipliers = obj.get("multipliers", {})
        if not isinstance(multipliers, dict):
            raise ValueError("multipliers must be an object")
        known = {k.value for k in RelationKind}
        out = {}
        for key, value in multipliers.items():
            if key not in known:
                raise ValueError(f"unknown relation kind in multipliers: {key!r}")
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"multiplier for {key!r} must be a number")
            out[key] = float(value)
        return cls(multipliers=out)


@dataclass
class ContextEntry:
    entity_id: str
    label: str
    score: float
    kinds: list[str]
    evidence: list[str]

    def to_obj(self) -> dict:
        return {
            "id": self.entity_id,
            "label": self.label,
            "score": self.score,
            "kinds": self.kinds,
            "evidence": self.evidence,
        }


@dataclass
class ContextView:
    focus_kind: str
    focus_id: str
    k: int
    generated_at: str
    developers: list[ContextEntry]
    resources: list[ContextEntry]
    tasks: list[ContextEntry]

    def to_obj(self) -> dict:
        return {
            "focus": {"kind": self.focus_kind, "id": self.focus_id},
            "generated_at": self.generated_at,
            "k": self.k,
            "developers": [e.to_obj() for e in self.developers],
            "resources": [e.to_obj() for e in self.resources],
            "tasks": [e.to_obj() for e in self.tasks],
        }


@dataclass
class SearchResult:
    entity_id: str
    label: str
    kind: str
    position: int

    def to_obj(self) -> dict:
        return {"id": self.entity_id, "label": self.label, "kind": self.kind}


# -- evidence timestamps -------------------------------------------------------

_LOC_COMMENT = re.compile(r"^task/(.+)/comment/(\d+)@\d+$")
_LOC_SUMMARY = re.compile(r"^task/(.+)/summary@\d+$")
_LOC_REVISION = re.compile(r"^revision/(.+?)(?:/message@\d+)?$")
_LOC_TASK = re.compile(r"^task/(.+)$")


def _evidence_time(store: ContextStore, ev: Evidence) -> datetime | None:
    """Best-effort timestamp for an evidence item, from what it points at."""
    m = _LOC_COMMENT.match(ev.locator)
    if m:
        task = store.tasks.get(m.group(1))
        index = int(m.group(2))
        if task and index < len(task.comments):
            return task.comments[index].timestamp
        return None
    if _LOC_SUMMARY.match(ev.locator):
        return None
    m = _LOC_REVISION.match(ev.locator)
    if m:
        rev = store.revisions.get(m.group(1))
        return rev.timestamp if rev else None
    m = _LOC_TASK.match(ev.locator)
    if m:
        task = store.tasks.get(m.group(1))
        return task_time(task) if task else None
    return None


class _Tally:
    __slots__ = ("score", "kinds", "evidence")

    def __init__(self):
        self.score = 0.0
        self.kinds: set[RelationKind] = set()
        self.evidence: list[Evidence] = []

    def add(self, kind: RelationKind, amount: float, evidence: Iterable[Evidence]):
        self.score += amount
        self.kinds.add(kind)
        self.evidence.extend(evidence)


class _Section:
    def __init__(self, qcfg: QueryConfig, skip: str | None = None):
        self.qcfg = qcfg
        self.skip = skip
        self.tallies: dict[str, _Tally] = {}

    def add_relation(self, entity_id: str, rel: Relation):
        self.add(entity_id, rel.kind, rel.weight, rel.evidence)

    def add(self, entity_id, kind, weight, evidence):
        if entity_id == self.skip:
            return
        tally = self.tallies.get(entity_id)
        if tally is None:
            tally = self.tallies[entity_id] = _Tally()
        tally.add(kind, self.qcfg.factor(kind) * weight, evidence)

    def entity_ids(self) -> set[str]:
        return set(self.tallies)


_NO_TIME = float("-inf")


def _finalize(
    store: ContextStore,
    section: _Section,
    label_of: Callable[[str], str],
    k: int,
) -> list[ContextEntry]:
    ranked = []
    for entity_id, tally in section.tallies.items():
        latest = _NO_TIME
        for ev in tally.evidence:
            ts = _evidence_time(store, ev)
            if ts is not None:
                latest = max(latest, ts.timestamp())
        entry = ContextEntry(
            entity_id=entity_id,
            label=label_of(entity_id),
            score=tally.score,
            kinds=[kind.value for kind in RelationKind if kind in tally.kinds],
            evidence=sorted({ev.description for ev in tally.evidence})[:3],
        )
        ranked.append((entry, latest))
    ranked.sort(key=lambda pair: (-pair[0].score, -pair[1], pair[0].entity_id))
    return [entry for entry, _ in ranked[:k]]


def _labelers(store: ContextStore):
    def developer_label(developer_id: str) -> str:
        dev = store.developers.get(developer_id)
        return dev.display_name if dev else developer_id

    def resource_label(resource_id: str) -> str:
        res = store.resources.get(resource_id)
        return res.path if res else resource_id

    def task_label(task_id: str) -> str:
        task = store.tasks.get(task_id)
        return task.summary if task else task_id

    return developer_label, resource_label, task_label


def _check_k(k: int) -> None:
    if k < 0:
        raise ValueError("k must be >= 0")


def _now() -> str:
    return format_rfc3339(datetime.now(timezone.utc).replace(microsecond=0))


def _view(store, focus_kind, focus_id, k, developers, resources, tasks):
    dev_label, res_label, task_label = _labelers(store)
    return ContextView(
        focus_kind=focus_kind,
        focus_id=focus_id,
        k=k,
        generated_at=_now(),
        developers=_finalize(store, developers, dev_label, k),
        resources=_finalize(store, resources, res_label, k),
        tasks=_finalize(store, tasks, task_label, k),
    )


def _tasks_touching_resource(store: ContextStore, resource_id: str, section: _Section):
    """Feed a section with tasks related to a resource.

    Direct name-match relations count at their own weight; tasks whose id
    pattern links them to a revision changing the resource count through
    that link (two-step path).
    """
    index = store.index
    for rel in index.by_source.get(resource_id, ()):
        if rel.kind in (
            RelationKind.RESOURCE_TASK_SUMMARY,
            RelationKind.RESOURCE_TASK_COMMENT,
        ):
            section.add_relation(rel.target_id, rel)
    for rev in index.resource_revisions.get(resource_id, ()):
        for rel in index.by_target.get(rev.revision_id, ()):
            if rel.kind == RelationKind.TASK_REVISION:
                section.add_relation(rel.source_id, rel)


def context_for_resource(
    store: ContextStore,
    resource_id: str,
    k: int = DEFAULT_SECTION_SIZE,
    qcfg: QueryConfig | None = None,
) -> ContextView:
    """Context of a file: co-changed files, tasks that touch it, people on it.

    Developers come in as authors of revisions changing the resource and as
    assignees of the related tasks.
    """
    _check_k(k)
    if resource_id not in store.resources:
        raise EntityNotFoundError(KIND_RESOURCE, resource_id)
    qcfg = qcfg or QueryConfig()
    index = store.index

    resources = _Section(qcfg, skip=resource_id)
    for rel in index.relations_at(resource_id):
        if rel.kind == RelationKind.COCHANGE:
            other = rel.target_id if rel.source_id == resource_id else rel.source_id
            resources.add_relation(other, rel)

    tasks = _Section(qcfg)
    _tasks_touching_resource(store, resource_id, tasks)

    developers = _Section(qcfg)
    for rev in index.resource_revisions.get(resource_id, ()):
        for rel in index.by_target.get(rev.revision_id, ()):
            if rel.kind == RelationKind.AUTHORED_REVISION:
                developers.add_relation(rel.source_id, rel)
    for task_id in tasks.entity_ids():
        for rel in index.by_target.get(task_id, ()):
            if rel.kind == RelationKind.ASSIGNED_TASK:
                developers.add_relation(rel.source_id, rel)

    return _view(store, KIND_RESOURCE, resource_id, k, developers, resources, tasks)


def context_for_task(
    store: ContextStore,
    task_id: str,
    k: int = DEFAULT_SECTION_SIZE,
    qcfg: QueryConfig | None = None,
) -> ContextView:
    """Context of a task: its resources, its people, and sibling tasks.

    Resources are the name-matched ones plus everything changed by linked
    revisions. Sibling tasks share at least one related resource and score
    by how many they share.
    """
    _check_k(k)
    if task_id not in store.tasks:
        raise EntityNotFoundError(KIND_TASK, task_id)
    qcfg = qcfg or QueryConfig()
    index = store.index

    linked_revisions = [
        rel
        for rel in index.by_source.get(task_id, ())
        if rel.kind == RelationKind.TASK_REVISION
    ]

    resources = _Section(qcfg)
    for rel in index.by_target.get(task_id, ()):
        if rel.kind in (
            RelationKind.RESOURCE_TASK_SUMMARY,
            RelationKind.RESOURCE_TASK_COMMENT,
        ):
            resources.add_relation(rel.source_id, rel)
    for rel in linked_revisions:
        rev = store.revisions[rel.target_id]
        for resource_id, _ in rev.changed:
            resources.add_relation(resource_id, rel)

    developers = _Section(qcfg)
    for rel in index.by_target.get(task_id, ()):
        if rel.kind == RelationKind.ASSIGNED_TASK:
            developers.add_relation(rel.source_id, rel)
    for rel in linked_revisions:
        for author_rel in index.by_target.get(rel.target_id, ()):
            if author_rel.kind == RelationKind.AUTHORED_REVISION:
                developers.add_relation(author_rel.source_id, author_rel)

    related_resources = resources.entity_ids()
    tasks = _Section(qcfg, skip=task_id)
    shared: dict[str, set[str]] = {}
    witnesses = _Section(qcfg, skip=task_id)
    for resource_id in related_resources:
        per_resource = _Section(qcfg, skip=task_id)
        _tasks_touching_resource(store, resource_id, per_resource)
        for other_id, tally in per_resource.tallies.items():
            shared.setdefault(other_id, set()).add(resource_id)
            wt = witnesses.tallies.setdefault(other_id, _Tally())
            wt.kinds.update(tally.kinds)
            wt.evidence.extend(tally.evidence)
    for other_id, resource_ids in shared.items():
        wt = witnesses.tallies[other_id]
        tally = tasks.tallies.setdefault(other_id, _Tally())
        tally.score = float(len(resource_ids))
        tally.kinds = wt.kinds
        tally.evidence = wt.evidence

    return _view(store, KIND_TASK, task_id, k, developers, resources, tasks)


def context_for_developer(
    store: ContextStore,
    developer_id: str,
    k: int = DEFAULT_SECTION_SIZE,
    qcfg: QueryConfig | None = None,
) -> ContextView:
    """Context of a person: nearby peers, touched resources, assigned tasks.

    A resource touch is one revision by this developer changing it, or one
    name-match relation from it to one of their assigned tasks. Assigned
    tasks all score alike and order by latest comment.
    """
    _check_k(k)
    if developer_id not in store.developers:
        raise EntityNotFoundError(KIND_DEVELOPER, developer_id)
    qcfg = qcfg or QueryConfig()
    index = store.index

    developers = _Section(qcfg, skip=developer_id)
    for rel in index.relations_at(developer_id):
        if rel.kind == RelationKind.DEV_PROXIMITY:
            other = rel.target_id if rel.source_id == developer_id else rel.source_id
            developers.add_relation(other, rel)

    resources = _Section(qcfg)
    for rev in index.developer_revisions.get(developer_id, ()):
        touched = {resource_id for resource_id, _ in rev.changed}
        for resource_id in sorted(touched):
            resources.add(
                resource_id,
                RelationKind.AUTHORED_REVISION,
                1,
                [
                    Evidence(
                        description=f"changed in revision {rev.revision_id}",
                        locator=revision_locator(rev.revision_id),
                    )
                ],
            )
    for task in index.developer_tasks.get(developer_id, ()):
        for rel in index.by_target.get(task.task_id, ()):
            if rel.kind in (
                RelationKind.RESOURCE_TASK_SUMMARY,
                RelationKind.RESOURCE_TASK_COMMENT,
            ):
                resources.add(rel.source_id, rel.kind, 1, rel.evidence)

    tasks = _Section(qcfg)
    for task in index.developer_tasks.get(developer_id, ()):
        for rel in index.by_target.get(task.task_id, ()):
            if rel.kind == RelationKind.ASSIGNED_TASK and rel.source_id == developer_id:
                tasks.add_relation(task.task_id, rel)

    return _view(store, KIND_DEVELOPER, developer_id, k, developers, resources, tasks)


def context_for(
    store: ContextStore,
    kind: str,
    entity_id: str,
    k: int = DEFAULT_SECTION_SIZE,
    qcfg: QueryConfig | None = None,
) -> ContextView:
    if kind == KIND_RESOURCE:
        return context_for_resource(store, entity_id, k, qcfg)
    if kind == KIND_TASK:
        return context_for_task(store, entity_id, k, qcfg)
    if kind == KIND_DEVELOPER:
        return context_for_developer(store, entity_id, k, qcfg)
    raise ValueError(f"no context view for kind {kind!r}")


# -- search and raw entity lookup ----------------------------------------------


def search_entities(
    store: ContextStore,
    query: str,
    kind: str | None = None,
    limit: int = DEFAULT_SEARCH_LIMIT,
) -> list[SearchResult]:
    """Case-insensitive substring search over entity identifying text.

    Resources match on path, tasks on summary and external id, developers on
    id, display name, and aliases. Results order by match position, then id.
    """
    if not query:
        raise ValueError("query must be non-empty")
    if kind is not None and kind != "any" and kind not in SEARCH_KINDS:
        raise ValueError(f"unknown search kind {kind!r}")
    if limit < 0:
        raise ValueError("limit must be >= 0")
    wanted = SEARCH_KINDS if kind in (None, "any") else (kind,)
    needle = query.lower()
    results: list[SearchResult] = []

    def position(fields: Iterable[str]) -> int | None:
        best = None
        for text in fields:
            pos = text.lower().find(needle)
            if pos >= 0 and (best is None or pos < best):
                best = pos
        return best

    if KIND_RESOURCE in wanted:
        for res in store.resources.values():
            pos = position([res.path])
            if pos is not None:
                results.append(
                    SearchResult(res.resource_id, res.path, KIND_RESOURCE, pos)
                )
    if KIND_TASK in wanted:
        for task in store.tasks.values():
            pos = position([task.summary, task.external_id])
            if pos is not None:
                results.append(SearchResult(task.task_id, task.summary, KIND_TASK, pos))
    if KIND_DEVELOPER in wanted:
        for dev in store.developers.values():
            fields = [dev.developer_id, dev.display_name]
            fields.extend(dev.vcs_authors)
            fields.extend(dev.its_accounts)
            pos = position(fields)
            if pos is not None:
                results.append(
                    SearchResult(dev.developer_id, dev.display_name, KIND_DEVELOPER, pos)
                )

    results.sort(key=lambda r: (r.position, r.entity_id, r.kind))
    return results[:limit]


def get_entity(store: ContextStore, kind: str, entity_id: str) -> dict:
    """Raw stored form of one entity, as it appears in the snapshot."""
    if kind == KIND_DEVELOPER:
        dev = store.developers.get(entity_id)
        if dev is None:
            raise EntityNotFoundError(kind, entity_id)
        return developer_obj(dev)
    if kind == KIND_RESOURCE:
        res = store.resources.get(entity_id)
        if res is None:
            raise EntityNotFoundError(kind, entity_id)
        return resource_obj(res)
    if kind == KIND_TASK:
        task = store.tasks.get(entity_id)
        if task is None:
            raise EntityNotFoundError(kind, entity_id)
        return task_obj(task)
    if kind == KIND_REVISION:
        rev = store.revisions.get(entity_id)
        if rev is None:
            raise EntityNotFoundError(kind, entity_id)
        return revision_obj(rev)
    raise ValueError(f"unknown entity kind {kind!r}")
