"""Project-layer context capture for software repositories.

Ingest version-control revisions and issue-tracker tasks, extract explicit
and implicit relations between developers, resources, tasks, and revisions,
and answer ranked "context of entity X" queries from a versioned snapshot.

The HTTP layer lives in :mod:`devcontext.service` and is imported lazily so
that library use and most CLI commands never load the web stack.
"""

from ._version import __version__
from .corpus import CorpusFormatError, parse_revisions, parse_tasks
from .extract import (
    ExtractionDependencyError,
    ExtractionReport,
    run_extraction,
)
from .identity import IdentityMap, load_identity_map
from .matching import MatchConfig
from .query import (
    ContextEntry,
    ContextView,
    EntityNotFoundError,
    QueryConfig,
    context_for,
    context_for_developer,
    context_for_resource,
    context_for_task,
    search_entities,
)
from .records import RevisionRecord, TaskRecord
from .store import (
    ContextStore,
    RelationKind,
    SnapshotIntegrityError,
    SnapshotVersionError,
    StoreError,
    load_snapshot,
)

__all__ = [
    "__version__",
    "ContextEntry",
    "ContextStore",
    "ContextView",
    "CorpusFormatError",
    "EntityNotFoundError",
    "ExtractionDependencyError",
    "ExtractionReport",
    "IdentityMap",
    "MatchConfig",
    "QueryConfig",
    "RelationKind",
    "RevisionRecord",
    "SnapshotIntegrityError",
    "SnapshotVersionError",
    "StoreError",
    "TaskRecord",
    "context_for",
    "context_for_developer",
    "context_for_resource",
    "context_for_task",
    "load_identity_map",
    "load_snapshot",
    "parse_revisions",
    "parse_tasks",
    "run_extraction",
    "search_entities",
]
