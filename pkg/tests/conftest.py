"""Shared fixtures; the tests directory itself is importable (oracle, corpusgen)."""

import os
import sys

import pytest

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
if TESTS_DIR not in sys.path:
    sys.path.insert(0, TESTS_DIR)

FIXTURES = os.path.join(TESTS_DIR, "fixtures")

from devcontext import ContextStore, MatchConfig, run_extraction  # noqa: E402
from devcontext.corpus import parse_revisions, parse_tasks  # noqa: E402
from devcontext.identity import load_identity_map  # noqa: E402


def load_fixture_corpus():
    with open(os.path.join(FIXTURES, "revisions.jsonl")) as fh:
        revisions = parse_revisions(fh)
    with open(os.path.join(FIXTURES, "tasks.jsonl")) as fh:
        tasks = parse_tasks(fh)
    identity = load_identity_map(os.path.join(FIXTURES, "identity.json"))
    return revisions, tasks, identity


def build_extracted_store(revisions, tasks, identity, cfg=None):
    cfg = cfg or MatchConfig()
    store = ContextStore()
    store.put_entities(revisions, tasks, identity, cfg)
    run_extraction(store, cfg)
    return store


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_fixture_corpus()


@pytest.fixture(scope="session")
def fixture_store(fixture_corpus):
    """Extracted store over the checked-in corpus. Treat as read-only."""
    revisions, tasks, identity = fixture_corpus
    return build_extracted_store(revisions, tasks, identity)


@pytest.fixture(scope="session")
def fixture_snapshot(fixture_store, tmp_path_factory):
    path = str(tmp_path_factory.mktemp("snap") / "fixture.ctx.gz")
    fixture_store.save_snapshot(path)
    return path


def pytest_terminal_summary(terminalreporter):
    """Echo acceptance criterion results; capture swallows in-test prints."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "CRITERION_RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in results:
        tag = "[PASS]" if passed else "[FAIL]"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"{tag} {name}{suffix}")
