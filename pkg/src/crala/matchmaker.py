"""Capability matchmaking: find repository entries that can fill a role.

An entry qualifies for a role when the role's interfaces are a subset of
the entry's (name and direction both equal) and every caller constraint
matches. Scores prefer lean candidates: |role interfaces| / |entry
interfaces| as an exact fraction, plus a small tag-affinity bonus (see
docs/matchmaking.md), capped at 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

import jsonschema

from .model import ComponentRole, Direction, ImplVariant, InterfaceRef

TAG_BONUS = Fraction(1, 10)


class RepositoryError(ValueError):
    """Repository file rejected; `pointer` is the offending JSON location."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


@dataclass(frozen=True)
class RepositoryEntry:
    name: str
    variant: ImplVariant
    interfaces: frozenset[InterfaceRef] = frozenset()
    os_requirement: Optional[str] = None
    footprint_mb: Optional[int] = None
    tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Repository:
    entries: tuple[RepositoryEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, name: str) -> Optional[RepositoryEntry]:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


@dataclass(frozen=True)
class Candidate:
    entry: RepositoryEntry
    score: Fraction
    matched: tuple[str, ...]
    surplus: tuple[str, ...]


@dataclass(frozen=True)
class Rejection:
    entry: RepositoryEntry
    missing: tuple[str, ...]
    failed_constraints: tuple[str, ...]


@dataclass(frozen=True)
class MatchResult:
    role: str
    candidates: tuple[Candidate, ...]
    rejected: tuple[Rejection, ...]
    constraints: Mapping[str, str] = field(default_factory=dict)


def _schema() -> dict:
    with resources.files("crala.schemas").joinpath("repository.schema.json").open(
        "r", encoding="utf-8"
    ) as handle:
        return json.load(handle)


def repository_from_data(data: object) -> Repository:
    """Build a repository from already-parsed JSON, rejecting schema
    violations and duplicate entry names with JSON-pointer locations."""
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        pointer = "/" + "/".join(str(part) for part in exc.absolute_path)
        raise RepositoryError(pointer, exc.message) from None
    entries: list[RepositoryEntry] = []
    seen: dict[str, int] = {}
    for position, raw in enumerate(data["entries"]):
        name = raw["name"]
        if name in seen:
            raise RepositoryError(
                f"/entries/{position}/name",
                f"duplicate entry name {name!r} (first at /entries/{seen[name]})",
            )
        seen[name] = position
        interfaces = frozenset(
            {InterfaceRef(i, Direction.PROVIDED) for i in raw.get("provides", [])}
            | {InterfaceRef(i, Direction.REQUIRED) for i in raw.get("requires", [])}
        )
        entries.append(
            RepositoryEntry(
                name,
                ImplVariant(raw["variant"]),
                interfaces,
                raw.get("os"),
                raw.get("footprint_mb"),
                frozenset(raw.get("tags", [])),
            )
        )
    return Repository(tuple(entries))


def load_repository(source: Union[str, Path]) -> Repository:
    """Load a repository JSON file (schema: docs/repository-schema.json)."""
    text = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RepositoryError("", f"not valid JSON: {exc}") from None
    return repository_from_data(data)


def _constraint_ok(entry: RepositoryEntry, key: str, value: str) -> bool:
    if key == "os":
        return entry.os_requirement is None or entry.os_requirement == value
    if key == "variant":
        return entry.variant.value == value
    return value in entry.tags


def _tag_hint(role: ComponentRole) -> frozenset[str]:
    hint = role.annotations.get("tags", "")
    return frozenset(part.strip() for part in hint.split(",") if part.strip())


def score_entry(role: ComponentRole, entry: RepositoryEntry) -> Fraction:
    """Score a qualifying entry: exact-match 1, surplus interfaces shrink it,
    tag affinity adds up to TAG_BONUS; always within [0, 1]."""
    if entry.interfaces:
        base = Fraction(len(role.interfaces), len(entry.interfaces))
    else:
        base = Fraction(1)
    hint = _tag_hint(role)
    bonus = Fraction(0)
    if hint:
        bonus = TAG_BONUS * Fraction(len(hint & entry.tags), len(hint))
    return min(Fraction(1), base + bonus)


def match_role(
    role: ComponentRole,
    repo: Repository,
    constraints: Optional[Mapping[str, str]] = None,
) -> MatchResult:
    """Return the entries qualifying for `role`, best first.

    Ordering: descending score, ties broken by ascending name. An empty
    candidate list is a normal result. Rejected entries are kept with the
    interfaces or constraints they failed, for explanation output.
    """
    constraints = dict(constraints or {})
    candidates: list[Candidate] = []
    rejected: list[Rejection] = []
    for entry in repo.entries:
        missing = tuple(
            sorted(ref.render() for ref in role.interfaces - entry.interfaces)
        )
        failed = tuple(
            sorted(
                f"{key}={value}"
                for key, value in constraints.items()
                if not _constraint_ok(entry, key, value)
            )
        )
        if missing or failed:
            rejected.append(Rejection(entry, missing, failed))
            continue
        candidates.append(
            Candidate(
                entry,
                score_entry(role, entry),
                tuple(sorted(ref.render() for ref in role.interfaces)),
                tuple(
                    sorted(ref.render() for ref in entry.interfaces - role.interfaces)
                ),
            )
        )
    candidates.sort(key=lambda c: (-c.score, c.entry.name))
    rejected.sort(key=lambda r: r.entry.name)
    return MatchResult(role.name, tuple(candidates), tuple(rejected), constraints)
