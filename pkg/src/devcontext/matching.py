"""Name and identifier matching primitives.

Resource names (file name, class name, fully qualified name) are searched in
issue text as whole tokens: the characters adjacent to a match must not be
letters, digits, or underscore, so "Grid" never matches inside "GridModel"
while "GridModel" still matches inside "eu.geclipse.core.GridModel.load"
(dots do not bind tokens together). Task identifiers are searched in revision
messages through an ordered list of pattern templates; the id occurrence must
be digit-delimited so "2042" never matches inside "20421".
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

DEFAULT_ID_PATTERNS = ("bug <id>", "#<id>", "<id>")
DEFAULT_SOURCE_EXTENSIONS = frozenset({"java"})
DEFAULT_SOURCE_ROOT_MARKERS = ("src/main/java", "src/test/java", "src")

FORM_FILE_NAME = "file_name"
FORM_CLASS_NAME = "class_name"
FORM_FQN = "fqn"


@dataclass(frozen=True)
class MatchConfig:
    """Every knob of the extraction algorithms, in one place.

    The matching rules themselves are fixed; these values bound them to keep
    string-matching false positives in check (short class names, version-like
    bare ids, bulk import commits).
    """

    case_sensitive: bool = True
    min_class_name_length: int = 3
    id_patterns: tuple[str, ...] = DEFAULT_ID_PATTERNS
    bare_id_min_digits: int = 3
    max_changeset_size: int = 50
    cochange_min_weight: int = 2
    source_extensions: frozenset[str] = DEFAULT_SOURCE_EXTENSIONS
    source_root_markers: tuple[str, ...] = DEFAULT_SOURCE_ROOT_MARKERS

    def __post_init__(self):
        if self.min_class_name_length < 1:
            raise ValueError("min_class_name_length must be >= 1")
        if not self.id_patterns:
            raise ValueError("id_patterns must be non-empty")
        for tpl in self.id_patterns:
            if "<id>" not in tpl:
                raise ValueError(f"id pattern {tpl!r} lacks the <id> placeholder")
        if self.bare_id_min_digits < 1:
            raise ValueError("bare_id_min_digits must be >= 1")
        if self.max_changeset_size < 1:
            raise ValueError("max_changeset_size must be >= 1")
        if self.cochange_min_weight < 1:
            raise ValueError("cochange_min_weight must be >= 1")

    @classmethod
    def from_obj(cls, obj: dict) -> "MatchConfig":
        known = {
            "case_sensitive": bool,
            "min_class_name_length": int,
            "id_patterns": tuple,
            "bare_id_min_digits": int,
            "max_changeset_size": int,
            "cochange_min_weight": int,
            "source_extensions": frozenset,
            "source_root_markers": tuple,
        }
        kwargs = {}
        for key, value in obj.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            conv = known[key]
            kwargs[key] = conv(value) if conv is not bool else bool(value)
        return cls(**kwargs)

    def to_obj(self) -> dict:
        return {
            "case_sensitive": self.case_sensitive,
            "min_class_name_length": self.min_class_name_length,
            "id_patterns": list(self.id_patterns),
            "bare_id_min_digits": self.bare_id_min_digits,
            "max_changeset_size": self.max_changeset_size,
            "cochange_min_weight": self.cochange_min_weight,
            "source_extensions": sorted(self.source_extensions),
            "source_root_markers": list(self.source_root_markers),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_obj(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def derive_resource_names(
    path: str, cfg: MatchConfig
) -> tuple[str, str | None, str | None]:
    """Derive (file_name, class_name, fqn) for a repository path.

    Only paths with a source extension get a class name (the file stem) and,
    when a source-root marker occurs in the path with at least one package
    segment after it, a fully qualified name built from those segments. A
    file directly under the marker has no package, hence no qualified name.
    """
    segments = [s for s in path.split("/") if s]
    file_name = segments[-1] if segments else path
    stem, dot, ext = file_name.rpartition(".")
    if not dot or not stem or ext.lower() not in cfg.source_extensions:
        return file_name, None, None
    class_name = stem

    fqn = None
    for marker in cfg.source_root_markers:
        marker_segs = [s for s in marker.split("/") if s]
        pos = _find_subsequence(segments[:-1], marker_segs)
        if pos is None:
            continue
        tail = segments[pos + len(marker_segs):]
        if len(tail) > 1:
            tail[-1] = class_name
            fqn = ".".join(tail)
        break
    return file_name, class_name, fqn


def _find_subsequence(haystack: list[str], needle: list[str]) -> int | None:
    if not needle:
        return None
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            return i
    return None


_WORD = re.compile(r"\w")


def match_name_in_text(
    name: str, text: str, cfg: MatchConfig, form: str | None = None
) -> list[int]:
    """Find whole-token occurrences of a resource name; returns offsets.

    Dots inside the name match literally. Matching is case-sensitive unless
    the config says otherwise. Class names shorter than the configured
    minimum never match (pass form="class_name" to apply that rule).
    """
    if not name:
        return []
    if form == FORM_CLASS_NAME and len(name) < cfg.min_class_name_length:
        return []
    flags = 0 if cfg.case_sensitive else re.IGNORECASE
    pattern = re.compile(r"(?<!\w)" + re.escape(name) + r"(?!\w)", flags)
    return [m.start() for m in pattern.finditer(text)]


def find_id_pattern(
    template: str, external_id: str, text: str, cfg: MatchConfig
) -> list[int]:
    """Find occurrences of an id pattern template instantiated with an id.

    The bare "<id>" template applies only to ids of at least
    ``bare_id_min_digits`` characters. The id occurrence must not touch
    digits on either side; literal keyword text matches case-insensitively
    and must start on a word boundary.
    """
    if template == "<id>" and len(external_id) < cfg.bare_id_min_digits:
        return []
    prefix, _, suffix = template.partition("<id>")
    parts = []
    if prefix:
        if _WORD.match(prefix[0]):
            parts.append(r"(?<!\w)")
        parts.append(re.escape(prefix))
    parts.append(r"(?<!\d)" + re.escape(external_id) + r"(?!\d)")
    if suffix:
        parts.append(re.escape(suffix))
        if _WORD.match(suffix[-1]):
            parts.append(r"(?!\w)")
    pattern = re.compile("".join(parts), re.IGNORECASE)
    return [m.start() for m in pattern.finditer(text)]
