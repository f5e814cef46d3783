"""Developer identity resolution across VCS author strings and ITS accounts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

AUTO_PREFIX = "auto:"

VCS = "vcs"
ITS = "its"


@dataclass
class IdentityMap:
    """Maps raw author/account strings to canonical developer ids.

    A raw string may appear under at most one canonical id; the same raw
    string may be listed for both sources of one developer.
    """

    vcs_to_id: dict[str, str] = field(default_factory=dict)
    its_to_id: dict[str, str] = field(default_factory=dict)
    canonical_ids: set[str] = field(default_factory=set)

    @classmethod
    def from_entries(cls, entries: list[dict]) -> "IdentityMap":
        m = cls()
        owner: dict[str, str] = {}
        for entry in entries:
            cid = entry.get("id", "")
            if not cid:
                raise ValueError("identity entry missing non-empty 'id'")
            if cid in m.canonical_ids:
                raise ValueError(f"duplicate canonical id {cid!r}")
            m.canonical_ids.add(cid)
            for source, target in ((VCS, m.vcs_to_id), (ITS, m.its_to_id)):
                for raw in entry.get(source, []):
                    prior = owner.get(raw)
                    if prior is not None and prior != cid:
                        raise ValueError(
                            f"alias {raw!r} mapped to both {prior!r} and {cid!r}"
                        )
                    owner[raw] = cid
                    target[raw] = cid
        return m


def load_identity_map(path: str) -> IdentityMap:
    """Read the JSON identity file: array of {"id", "vcs": [...], "its": [...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValueError("identity map must be a JSON array")
    return IdentityMap.from_entries(entries)


def resolve_identity(raw: str, source: str, identity: IdentityMap) -> str:
    """Return the canonical developer id for a raw author/account string.

    Mapped strings resolve through the identity map for their source.
    Canonical ids resolve to themselves, and everything else falls back to a
    deterministic ``auto:`` id (trimmed, lowercased), so resolving any result
    again is a no-op.
    """
    table = identity.vcs_to_id if source == VCS else identity.its_to_id
    mapped = table.get(raw)
    if mapped is not None:
        return mapped
    if raw in identity.canonical_ids:
        return raw
    norm = raw.strip().lower()
    if norm.startswith(AUTO_PREFIX):
        return norm
    return AUTO_PREFIX + norm


def display_name_for(developer_id: str) -> str:
    """Human label for a developer id: the part after a namespace prefix."""
    _, sep, rest = developer_id.partition(":")
    return rest if sep and rest else developer_id
