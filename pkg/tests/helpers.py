"""Test-side utilities: relation set comparison and evidence re-verification."""

import re

from devcontext.matching import find_id_pattern, match_name_in_text
from devcontext.store import RelationKind

FORM_ATTR = {"file_name": "file_name", "class_name": "class_name", "fqn": "fqn"}

_DESC_SUMMARY = re.compile(r'^(file_name|class_name|fqn) "(.+)" in summary$')
_DESC_COMMENT = re.compile(r'^(file_name|class_name|fqn) "(.+)" in comment (\d+)$')
_DESC_PATTERN = re.compile(r'^pattern "(.+)" for id (.+)$')
_DESC_COCHANGE = re.compile(r"^changed together in revision (.+)$")
_DESC_PROXIMITY = re.compile(r'^shared work on "(.+)"$')
_DESC_AUTHORED = re.compile(r'^committed as "(.*)"$')
_DESC_ASSIGNED = re.compile(r'^assigned to "(.+)"$')

_LOC_SUMMARY = re.compile(r"^task/(.+)/summary@(\d+)$")
_LOC_COMMENT = re.compile(r"^task/(.+)/comment/(\d+)@(\d+)$")
_LOC_MESSAGE = re.compile(r"^revision/(.+)/message@(\d+)$")


def relation_map(store):
    """Store relations as {(kind, source, target): (weight, {(desc, loc)})}."""
    out = {}
    for (kind, source, target), rel in store.relations.items():
        evidence = frozenset((ev.description, ev.locator) for ev in rel.evidence)
        out[(kind, source, target)] = (rel.weight, evidence)
    return out


def oracle_map(rels):
    """Oracle relations in the same shape as relation_map."""
    if isinstance(rels, dict):
        rels = rels.values()
    out = {}
    for rel in rels:
        evidence = frozenset((ev.description, ev.locator) for ev in rel.evidence)
        key = (rel.kind, rel.source, rel.target)
        assert key not in out, f"oracle emitted {key} twice"
        out[key] = (rel.weight, evidence)
    return out


def diff_relation_maps(got, want):
    """Human-readable discrepancy list between two relation maps."""
    problems = []
    for key in sorted(set(got) | set(want)):
        if key not in got:
            problems.append(f"missing {key}")
        elif key not in want:
            problems.append(f"unexpected {key}")
        elif got[key] != want[key]:
            problems.append(f"mismatch {key}: got {got[key]}, want {want[key]}")
    return problems


def touched_resources(store, developer_id):
    """Resources a developer reaches through commits or assigned-task matches."""
    out = set()
    for rev in store.revisions.values():
        if rev.developer_id == developer_id:
            out.update(rid for rid, _ in rev.changed)
    by_task = {}
    for rel in store.relations.values():
        if rel.kind in (
            RelationKind.RESOURCE_TASK_SUMMARY,
            RelationKind.RESOURCE_TASK_COMMENT,
        ):
            by_task.setdefault(rel.target_id, set()).add(rel.source_id)
    for task in store.tasks.values():
        if task.developer_id == developer_id:
            out.update(by_task.get(task.task_id, ()))
    return out


def _resource_name(store, resource_id, form):
    res = store.resources[resource_id]
    return getattr(res, FORM_ATTR[form])


def verify_relation(store, cfg, rel):
    """Re-verify every evidence item of a stored relation from the raw entities.

    Raises AssertionError with a specific message on the first violation.
    """
    kind = rel.kind
    assert rel.weight == len(rel.evidence), f"{kind}: weight != evidence count"
    assert rel.evidence, f"{kind}: no evidence"

    if kind is RelationKind.AUTHORED_REVISION:
        (ev,) = rel.evidence
        rev = store.revisions[rel.target_id]
        assert rev.developer_id == rel.source_id
        assert ev.locator == f"revision/{rel.target_id}"
        m = _DESC_AUTHORED.match(ev.description)
        assert m and m.group(1) == rev.author, ev.description
        return

    if kind is RelationKind.ASSIGNED_TASK:
        (ev,) = rel.evidence
        task = store.tasks[rel.target_id]
        assert task.developer_id == rel.source_id
        assert task.assignee, "assigned relation for empty assignee"
        assert ev.locator == f"task/{rel.target_id}"
        m = _DESC_ASSIGNED.match(ev.description)
        assert m and m.group(1) == task.assignee, ev.description
        return

    if kind is RelationKind.RESOURCE_TASK_SUMMARY:
        task = store.tasks[rel.target_id]
        forms = set()
        for ev in rel.evidence:
            dm = _DESC_SUMMARY.match(ev.description)
            lm = _LOC_SUMMARY.match(ev.locator)
            assert dm and lm, (ev.description, ev.locator)
            form, name = dm.group(1), dm.group(2)
            assert lm.group(1) == rel.target_id
            assert name == _resource_name(store, rel.source_id, form)
            offsets = match_name_in_text(name, task.summary, cfg, form=form)
            assert int(lm.group(2)) in offsets, (name, task.summary)
            forms.add(form)
        assert len(forms) == len(rel.evidence), "duplicate form in evidence"
        return

    if kind is RelationKind.RESOURCE_TASK_COMMENT:
        task = store.tasks[rel.target_id]
        indices = set()
        for ev in rel.evidence:
            dm = _DESC_COMMENT.match(ev.description)
            lm = _LOC_COMMENT.match(ev.locator)
            assert dm and lm, (ev.description, ev.locator)
            form, name, ci = dm.group(1), dm.group(2), int(dm.group(3))
            assert lm.group(1) == rel.target_id and int(lm.group(2)) == ci
            assert ci < len(task.comments)
            assert name == _resource_name(store, rel.source_id, form)
            offsets = match_name_in_text(name, task.comments[ci].text, cfg, form=form)
            assert int(lm.group(3)) in offsets, (name, task.comments[ci].text)
            indices.add(ci)
        assert len(indices) == len(rel.evidence), "duplicate comment in evidence"
        return

    if kind is RelationKind.TASK_REVISION:
        (ev,) = rel.evidence
        task = store.tasks[rel.source_id]
        rev = store.revisions[rel.target_id]
        dm = _DESC_PATTERN.match(ev.description)
        lm = _LOC_MESSAGE.match(ev.locator)
        assert dm and lm, (ev.description, ev.locator)
        template, ext = dm.group(1), dm.group(2)
        assert ext == task.external_id
        assert template in cfg.id_patterns
        assert lm.group(1) == rel.target_id
        offsets = find_id_pattern(template, ext, rev.message, cfg)
        assert int(lm.group(2)) in offsets, (template, ext, rev.message)
        return

    if kind is RelationKind.COCHANGE:
        assert rel.source_id < rel.target_id, "not canonicalized"
        assert rel.weight >= cfg.cochange_min_weight
        seen = set()
        for ev in rel.evidence:
            dm = _DESC_COCHANGE.match(ev.description)
            assert dm, ev.description
            rev_id = dm.group(1)
            assert ev.locator == f"revision/{rev_id}"
            assert rev_id not in seen, "revision cited twice"
            seen.add(rev_id)
            rev = store.revisions[rev_id]
            changed = {rid for rid, _ in rev.changed}
            assert rel.source_id in changed and rel.target_id in changed
            assert len(rev.changed) <= cfg.max_changeset_size
        return

    if kind is RelationKind.DEV_PROXIMITY:
        assert rel.source_id < rel.target_id, "not canonicalized"
        left = touched_resources(store, rel.source_id)
        right = touched_resources(store, rel.target_id)
        seen = set()
        for ev in rel.evidence:
            dm = _DESC_PROXIMITY.match(ev.description)
            assert dm, ev.description
            resource_id = dm.group(1)
            assert ev.locator == f"resource/{resource_id}"
            assert resource_id not in seen, "resource cited twice"
            seen.add(resource_id)
            assert resource_id in store.resources
            assert resource_id in left and resource_id in right
        return

    raise AssertionError(f"unknown relation kind {kind!r}")
