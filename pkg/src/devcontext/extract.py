"""Relation extraction: three text-matching algorithms plus two inferred ones.

Extractors are pure functions from (store, config) to relation lists; only
``run_extraction`` writes to the store. Each extractor has straightforward
semantics (search candidate resource names in task text, search task ids in
revision messages, count co-changed pairs, intersect per-developer touched
sets), and the implementations below use token/id indexes so large corpora
scan in one pass per text instead of one pass per (entity, text) pair. The
``matching`` primitives define the ground truth those indexes must agree
with.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple

from .matching import (
    DEFAULT_ID_PATTERNS,
    FORM_CLASS_NAME,
    FORM_FILE_NAME,
    FORM_FQN,
    MatchConfig,
    find_id_pattern,
    match_name_in_text,
)
from .store import (
    ContextStore,
    Evidence,
    Relation,
    RelationKind,
    comment_locator,
    resource_locator,
    revision_locator,
    summary_locator,
)

FORM_ORDER = (FORM_FILE_NAME, FORM_CLASS_NAME, FORM_FQN)


class ExtractionDependencyError(Exception):
    """A requested algorithm needs relations that are neither stored nor selected."""


@dataclass
class ExtractionReport:
    resource_task_summary: int = 0
    resource_task_comment: int = 0
    task_revision: int = 0
    cochange: int = 0
    dev_proximity: int = 0
    config_hash: str = ""

    def to_obj(self) -> dict:
        return {
            "resource_task_summary": self.resource_task_summary,
            "resource_task_comment": self.resource_task_comment,
            "task_revision": self.task_revision,
            "cochange": self.cochange,
            "dev_proximity": self.dev_proximity,
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_store(cls, store: ContextStore) -> "ExtractionReport":
        counts = store.relation_counts()
        return cls(
            resource_task_summary=counts[RelationKind.RESOURCE_TASK_SUMMARY.value],
            resource_task_comment=counts[RelationKind.RESOURCE_TASK_COMMENT.value],
            task_revision=counts[RelationKind.TASK_REVISION.value],
            cochange=counts[RelationKind.COCHANGE.value],
            dev_proximity=counts[RelationKind.DEV_PROXIMITY.value],
            config_hash=store.provenance.config_hash,
        )


# -- fast whole-token name scanning ------------------------------------------


class NameHit(NamedTuple):
    resource_id: str
    form: str
    name: str
    offset: int


class _Entry(NamedTuple):
    parts: tuple[str, ...]
    name: str
    form: str
    resource_id: str


_RUN = re.compile(r"[\w.]+")
_PLAIN = re.compile(r"^[\w.]+$")


class NameScanner:
    """One-pass scanner for whole-token resource-name occurrences.

    Token boundaries only break at characters outside [letter, digit, "_",
    "."], and dots split a token run into segments; a name matches where its
    dot-segments align with consecutive run segments. This reproduces
    ``match_name_in_text`` exactly for names made of word characters and
    dots; other names (hyphens etc.) fall back to the primitive per text.
    """

    def __init__(self, entries: Iterable[tuple[str, str, str]], cfg: MatchConfig):
        self.cfg = cfg
        self.by_first: dict[str, list[_Entry]] = {}
        self.fallback: list[_Entry] = []
        for resource_id, form, name in entries:
            if form == FORM_CLASS_NAME and len(name) < cfg.min_class_name_length:
                continue
            entry = _Entry(tuple(name.split(".")), name, form, resource_id)
            if _PLAIN.match(name):
                key = entry.parts[0] if cfg.case_sensitive else entry.parts[0].lower()
                self.by_first.setdefault(key, []).append(entry)
            else:
                self.fallback.append(entry)

    def scan(self, text: str) -> list[NameHit]:
        hits: list[NameHit] = []
        fold = (lambda s: s) if self.cfg.case_sensitive else (lambda s: s.lower())
        for run in _RUN.finditer(text):
            segments: list[tuple[str, int]] = []
            pos = run.start()
            for piece in run.group().split("."):
                segments.append((fold(piece), pos))
                pos += len(piece) + 1
            for j, (seg, seg_offset) in enumerate(segments):
                for entry in self.by_first.get(seg, ()):
                    if j + len(entry.parts) > len(segments):
                        continue
                    if all(
                        fold(entry.parts[i]) == segments[j + i][0]
                        for i in range(1, len(entry.parts))
                    ):
                        hits.append(
                            NameHit(entry.resource_id, entry.form, entry.name, seg_offset)
                        )
        for entry in self.fallback:
            for offset in match_name_in_text(entry.name, text, self.cfg, entry.form):
                hits.append(NameHit(entry.resource_id, entry.form, entry.name, offset))
        return hits


def _candidate_name_entries(store: ContextStore, cfg: MatchConfig):
    """Name forms of resources referenced by at least one revision."""
    from .matching import derive_resource_names

    candidates = sorted(store.index.resource_revisions)
    for resource_id in candidates:
        file_name, class_name, fqn = derive_resource_names(resource_id, cfg)
        yield resource_id, FORM_FILE_NAME, file_name
        if class_name is not None:
            yield resource_id, FORM_CLASS_NAME, class_name
        if fqn is not None:
            yield resource_id, FORM_FQN, fqn


# -- the five extractors ------------------------------------------------------


def extract_resource_task_summary(
    store: ContextStore, cfg: MatchConfig
) -> list[Relation]:
    """One relation per (resource, task) whose summary mentions a name form.

    The weight counts distinct matching name forms, each contributing one
    evidence item at its first occurrence.
    """
    scanner = NameScanner(_candidate_name_entries(store, cfg), cfg)
    relations = []
    for task in sorted(store.tasks.values(), key=lambda t: t.task_id):
        first_offsets: dict[tuple[str, str], tuple[int, str]] = {}
        for hit in scanner.scan(task.summary):
            key = (hit.resource_id, hit.form)
            if key not in first_offsets or hit.offset < first_offsets[key][0]:
                first_offsets[key] = (hit.offset, hit.name)
        by_resource: dict[str, list[tuple[str, int, str]]] = defaultdict(list)
        for (resource_id, form), (offset, name) in first_offsets.items():
            by_resource[resource_id].append((form, offset, name))
        for resource_id in sorted(by_resource):
            matched = by_resource[resource_id]
            matched.sort(key=lambda item: FORM_ORDER.index(item[0]))
            evidence = [
                Evidence(
                    description=f'{form} "{name}" in summary',
                    locator=summary_locator(task.task_id, offset),
                )
                for form, offset, name in matched
            ]
            relations.append(
                Relation(
                    kind=RelationKind.RESOURCE_TASK_SUMMARY,
                    source_id=resource_id,
                    target_id=task.task_id,
                    weight=len(evidence),
                    evidence=evidence,
                )
            )
    return relations


def extract_resource_task_comments(
    store: ContextStore, cfg: MatchConfig
) -> list[Relation]:
    """One relation per (resource, task) with mentions in the task's comments.

    The weight counts how many comments mention the resource; each matching
    comment contributes one evidence item citing its index and the first
    matching name form.
    """
    scanner = NameScanner(_candidate_name_entries(store, cfg), cfg)
    relations = []
    for task in sorted(store.tasks.values(), key=lambda t: t.task_id):
        per_resource: dict[str, list[tuple[int, str, str, int]]] = defaultdict(list)
        for ci, comment in enumerate(task.comments):
            best: dict[str, tuple[int, int, str]] = {}
            for hit in scanner.scan(comment.text):
                rank = (FORM_ORDER.index(hit.form), hit.offset)
                if hit.resource_id not in best or rank < best[hit.resource_id][:2]:
                    best[hit.resource_id] = (rank[0], hit.offset, hit.name)
            for resource_id, (form_idx, offset, name) in best.items():
                per_resource[resource_id].append(
                    (ci, FORM_ORDER[form_idx], name, offset)
                )
        for resource_id in sorted(per_resource):
            mentions = per_resource[resource_id]
            evidence = [
                Evidence(
                    description=f'{form} "{name}" in comment {ci}',
                    locator=comment_locator(task.task_id, ci, offset),
                )
                for ci, form, name, offset in mentions
            ]
            relations.append(
                Relation(
                    kind=RelationKind.RESOURCE_TASK_COMMENT,
                    source_id=resource_id,
                    target_id=task.task_id,
                    weight=len(evidence),
                    evidence=evidence,
                )
            )
    return relations


def _task_revision_reference(
    store: ContextStore, cfg: MatchConfig, tasks, revisions
) -> list[Relation]:
    relations = []
    for task in tasks:
        for rev in revisions:
            for template in cfg.id_patterns:
                offsets = find_id_pattern(template, task.external_id, rev.message, cfg)
                if offsets:
                    relations.append(
                        _task_revision_relation(
                            task, rev, template, min(offsets)
                        )
                    )
                    break
    return relations


def _task_revision_relation(task, rev, template, offset) -> Relation:
    return Relation(
        kind=RelationKind.TASK_REVISION,
        source_id=task.task_id,
        target_id=rev.revision_id,
        weight=1,
        evidence=[
            Evidence(
                description=f'pattern "{template}" for id {task.external_id}',
                locator=revision_locator(rev.revision_id, offset),
            )
        ],
    )


_DIGIT_RUN = re.compile(r"\d+")
_WORD_CHAR = re.compile(r"\w")


def extract_task_revision(store: ContextStore, cfg: MatchConfig) -> list[Relation]:
    """Link tasks to revisions whose message cites the task's external id.

    Patterns are tried in configured order per (task, revision) pair and the
    first hit wins. With the stock patterns and all-digit ids, messages are
    scanned once for digit runs instead of once per task.
    """
    tasks = sorted(store.tasks.values(), key=lambda t: t.task_id)
    revisions = sorted(store.revisions.values(), key=lambda r: r.revision_id)

    if cfg.id_patterns != DEFAULT_ID_PATTERNS:
        return _task_revision_reference(store, cfg, tasks, revisions)

    digit_tasks: dict[str, list] = defaultdict(list)
    other_tasks = []
    for task in tasks:
        if task.external_id.isdigit():
            digit_tasks[task.external_id].append(task)
        else:
            other_tasks.append(task)

    found: dict[tuple[str, str], tuple[int, int, str, str]] = {}
    for rev in revisions:
        message = rev.message
        for m in _DIGIT_RUN.finditer(message):
            run = m.group()
            tasks_for_run = digit_tasks.get(run)
            if not tasks_for_run:
                continue
            s = m.start()
            hits: list[tuple[int, int]] = []  # (pattern index, pattern offset)
            prefix = message[max(0, s - 4) : s]
            if (
                s >= 4
                and prefix.lower() == "bug "
                and (s == 4 or not _WORD_CHAR.match(message[s - 5]))
            ):
                hits.append((0, s - 4))
            if s >= 1 and message[s - 1] == "#":
                hits.append((1, s - 1))
            if len(run) >= cfg.bare_id_min_digits:
                hits.append((2, s))
            for task in tasks_for_run:
                for pattern_idx, offset in hits:
                    key = (task.task_id, rev.revision_id)
                    best = found.get(key)
                    if best is None or (pattern_idx, offset) < best[:2]:
                        found[key] = (
                            pattern_idx,
                            offset,
                            task.task_id,
                            rev.revision_id,
                        )

    tasks_by_id = {t.task_id: t for t in tasks}
    revs_by_id = {r.revision_id: r for r in revisions}
    relations = [
        _task_revision_relation(
            tasks_by_id[task_id],
            revs_by_id[rev_id],
            DEFAULT_ID_PATTERNS[pattern_idx],
            offset,
        )
        for (task_id, rev_id), (pattern_idx, offset, _, _) in sorted(found.items())
    ]
    if other_tasks:
        relations.extend(
            _task_revision_reference(store, cfg, other_tasks, revisions)
        )
        relations.sort(key=lambda r: (r.source_id, r.target_id))
    return relations


def extract_cochange(store: ContextStore, cfg: MatchConfig) -> list[Relation]:
    """Pair up resources that change together often enough.

    Revisions larger than ``max_changeset_size`` (bulk imports, vendoring)
    contribute nothing; pairs below ``cochange_min_weight`` are dropped.
    """
    pair_revisions: dict[tuple[str, str], list[str]] = defaultdict(list)
    for rev in sorted(store.revisions.values(), key=lambda r: r.revision_id):
        if len(rev.changed) > cfg.max_changeset_size:
            continue
        ids = sorted({resource_id for resource_id, _ in rev.changed})
        for a, b in combinations(ids, 2):
            pair_revisions[(a, b)].append(rev.revision_id)
    relations = []
    for (a, b), rev_ids in sorted(pair_revisions.items()):
        if len(rev_ids) < cfg.cochange_min_weight:
            continue
        relations.append(
            Relation(
                kind=RelationKind.COCHANGE,
                source_id=a,
                target_id=b,
                weight=len(rev_ids),
                evidence=[
                    Evidence(
                        description=f"changed together in revision {rev_id}",
                        locator=revision_locator(rev_id),
                    )
                    for rev_id in rev_ids
                ],
            )
        )
    return relations


def extract_dev_proximity(
    store: ContextStore, cfg: MatchConfig, prior_relations: Iterable[Relation]
) -> list[Relation]:
    """Relate developers by the resources they share work on.

    A developer touches a resource by committing a revision that changes it
    or by being assigned a task related to it (via the resource/task match
    relations passed in). Pair weight is the size of the intersection.
    """
    task_resources: dict[str, set[str]] = defaultdict(set)
    for rel in prior_relations:
        if rel.kind in (
            RelationKind.RESOURCE_TASK_SUMMARY,
            RelationKind.RESOURCE_TASK_COMMENT,
        ):
            task_resources[rel.target_id].add(rel.source_id)

    index = store.index
    touched: dict[str, set[str]] = {}
    for developer_id in store.developers:
        resources: set[str] = set()
        for rev in index.developer_revisions.get(developer_id, ()):
            resources.update(resource_id for resource_id, _ in rev.changed)
        for task in index.developer_tasks.get(developer_id, ()):
            resources.update(task_resources.get(task.task_id, ()))
        touched[developer_id] = resources

    relations = []
    for d1, d2 in combinations(sorted(store.developers), 2):
        shared = sorted(touched[d1] & touched[d2])
        if not shared:
            continue
        relations.append(
            Relation(
                kind=RelationKind.DEV_PROXIMITY,
                source_id=d1,
                target_id=d2,
                weight=len(shared),
                evidence=[
                    Evidence(
                        description=f'shared work on "{resource_id}"',
                        locator=resource_locator(resource_id),
                    )
                    for resource_id in shared
                ],
            )
        )
    return relations


# -- orchestration -------------------------------------------------------------

EXTRACTION_ORDER = (
    RelationKind.RESOURCE_TASK_SUMMARY,
    RelationKind.RESOURCE_TASK_COMMENT,
    RelationKind.TASK_REVISION,
    RelationKind.COCHANGE,
    RelationKind.DEV_PROXIMITY,
)


def run_extraction(
    store: ContextStore,
    cfg: MatchConfig,
    algorithms: set[RelationKind] | None = None,
) -> ExtractionReport:
    """Run the selected extractors and upsert their relations into the store.

    Each selected kind is recomputed from scratch (drop, then insert), so
    re-running over an unchanged store is idempotent. Stored resource name
    forms are refreshed under this config first, keeping displayed names
    consistent with how matching actually ran.
    """
    from .store import refresh_resource_names

    selected = set(EXTRACTION_ORDER) if algorithms is None else set(algorithms)
    unknown = selected - set(EXTRACTION_ORDER)
    if unknown:
        names = ", ".join(sorted(k.value for k in unknown))
        raise ValueError(f"not extractable: {names}")

    if RelationKind.DEV_PROXIMITY in selected:
        match_kinds = {
            RelationKind.RESOURCE_TASK_SUMMARY,
            RelationKind.RESOURCE_TASK_COMMENT,
        }
        counts = store.relation_counts()
        stored = sum(counts[k.value] for k in match_kinds)
        if not (selected & match_kinds) and stored == 0:
            raise ExtractionDependencyError(
                "dev_proximity needs resource/task relations: select"
                " resource_task_summary or resource_task_comment too, or run"
                " them first"
            )

    refresh_resource_names(store, cfg)

    for kind in EXTRACTION_ORDER:
        if kind not in selected:
            continue
        if kind == RelationKind.RESOURCE_TASK_SUMMARY:
            relations = extract_resource_task_summary(store, cfg)
        elif kind == RelationKind.RESOURCE_TASK_COMMENT:
            relations = extract_resource_task_comments(store, cfg)
        elif kind == RelationKind.TASK_REVISION:
            relations = extract_task_revision(store, cfg)
        elif kind == RelationKind.COCHANGE:
            relations = extract_cochange(store, cfg)
        else:
            prior = store.relations_of_kind(
                RelationKind.RESOURCE_TASK_SUMMARY
            ) + store.relations_of_kind(RelationKind.RESOURCE_TASK_COMMENT)
            relations = extract_dev_proximity(store, cfg, prior)
        store.drop_relations({kind})
        for rel in relations:
            for ev in rel.evidence:
                store.upsert_relation(rel.kind, rel.source_id, rel.target_id, ev)

    store.provenance.config_hash = cfg.config_hash()
    return ExtractionReport.from_store(store)
