"""Cross-document linking: the workspace.

A workspace holds a set of documents and the resolved implements / deploys /
realizes references between them. Link edges only ever point one level up
(assembly -> configuration -> specification), so the link graph is a forest
of depth at most three rooted at specifications.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import (
    Assembly,
    Configuration,
    Diagnostic,
    Document,
    Level,
    Severity,
    Specification,
    dedupe_diagnostics,
    document_level,
    sort_diagnostics,
)


class AmbiguousReferenceError(LookupError):
    """An unqualified name matched more than one element."""

    def __init__(self, path: Sequence[str], candidates: list[tuple[str, ...]]):
        self.path = tuple(path)
        self.candidates = sorted(candidates)
        rendered = ", ".join(".".join(c) for c in self.candidates)
        super().__init__(f"{'.'.join(path)} is ambiguous: {rendered}")


@dataclass(frozen=True)
class LinkEdge:
    child: str
    parent: str
    kind: str  # "implements" | "deploys"


@dataclass(frozen=True)
class Workspace:
    documents: tuple[Document, ...]
    diagnostics: tuple[Diagnostic, ...]
    links: tuple[LinkEdge, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)

    def document(self, name: str) -> Optional[Document]:
        for entry in self._index.get((name,), ()):
            if _is_document(entry):
                return entry
        return None

    def parent_of(self, child: str) -> Optional[Document]:
        for link in self.links:
            if link.child == child:
                return self.document(link.parent)
        return None

    def children_of(self, parent: str) -> tuple[Document, ...]:
        out = []
        for link in self.links:
            if link.parent == parent:
                doc = self.document(link.child)
                if doc is not None:
                    out.append(doc)
        return tuple(out)

    def specification_of(self, config: Configuration) -> Optional[Specification]:
        parent = self.parent_of(config.name)
        return parent if isinstance(parent, Specification) else None

    def configuration_of(self, assembly: Assembly) -> Optional[Configuration]:
        parent = self.parent_of(assembly.name)
        return parent if isinstance(parent, Configuration) else None


def _is_document(element: object) -> bool:
    return isinstance(element, (Specification, Configuration, Assembly))


def _index_document(index: dict[tuple[str, ...], list], doc: Document) -> None:
    root = (doc.name,)

    def add(path: tuple[str, ...], element: object) -> None:
        index.setdefault(path, []).append(element)

    add(root, doc)
    if isinstance(doc, Specification):
        for role in doc.roles:
            add(root + (role.name,), role)
        for robot in doc.robots:
            add(root + (robot.name,), robot)
            for item in (*robot.sensors, *robot.actuators):
                add(root + (robot.name, item.name), item)
    elif isinstance(doc, Configuration):
        for robot in doc.robots:
            add(root + (robot.name,), robot)
            for item in (*robot.sensors, *robot.actuators):
                add(root + (robot.name, item.name), item)
        for vm in doc.vms:
            add(root + (vm.name,), vm)
        for impl in doc.impls:
            add(root + (impl.name,), impl)
    elif isinstance(doc, Assembly):
        for cloud in doc.clouds:
            add(root + (cloud.name,), cloud)
            for machine in cloud.machines:
                add(root + (cloud.name, machine.name), machine)
        for instance in doc.instances:
            add(root + (instance.name,), instance)


def build_workspace(documents: Iterable[Document]) -> Workspace:
    """Link documents into a workspace, resolving every implements / deploys /
    realizes reference or recording a diagnostic for it.

    Codes: E-WS-01 duplicate document name, E-WS-02 link to a document of the
    wrong level, E-WS-03 dangling reference. Documents are never mutated.
    """
    docs = tuple(documents)
    diagnostics: list[Diagnostic] = []
    by_name: dict[str, Document] = {}
    for doc in docs:
        if doc.name in by_name:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "E-WS-01",
                    f"duplicate document name {doc.name!r}",
                    doc.span,
                )
            )
            continue
        by_name[doc.name] = doc

    index: dict[tuple[str, ...], list] = {}
    for doc in by_name.values():
        _index_document(index, doc)

    links: list[LinkEdge] = []

    def link(child: Document, parent_name: str, kind: str, expected: Level) -> Optional[Document]:
        parent = by_name.get(parent_name)
        if parent is None:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "E-WS-03",
                    f"{child.name} {kind} unknown document {parent_name!r}",
                    child.span,
                )
            )
            return None
        if document_level(parent) is not expected:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "E-WS-02",
                    f"{child.name} {kind} {parent_name!r}, which is "
                    f"{document_level(parent).value}, not {expected.value}",
                    child.span,
                )
            )
            return None
        links.append(LinkEdge(child.name, parent.name, kind))
        return parent

    for doc in by_name.values():
        if isinstance(doc, Configuration):
            spec = link(doc, doc.implements, "implements", Level.SPECIFICATION)
            if isinstance(spec, Specification):
                role_names = {r.name for r in spec.roles}
                robot_names = {r.name for r in spec.robots}
                for impl in doc.impls:
                    if impl.realizes not in role_names:
                        diagnostics.append(
                            Diagnostic(
                                Severity.ERROR,
                                "E-WS-03",
                                f"{doc.name}.{impl.name} realizes unknown role "
                                f"{impl.realizes!r}",
                                impl.span,
                            )
                        )
                for robot in doc.robots:
                    if robot.realizes not in robot_names:
                        diagnostics.append(
                            Diagnostic(
                                Severity.ERROR,
                                "E-WS-03",
                                f"{doc.name}.{robot.name} realizes unknown concept "
                                f"robot {robot.realizes!r}",
                                robot.span,
                            )
                        )
        elif isinstance(doc, Assembly):
            link(doc, doc.deploys, "deploys", Level.CONFIGURATION)

    return Workspace(
        docs,
        dedupe_diagnostics(sort_diagnostics(diagnostics)),
        tuple(sorted(links, key=lambda e: (e.child, e.parent))),
        index,
    )


def resolve(workspace: Workspace, path: Sequence[str]):
    """Look up an element by qualified or unqualified dotted path.

    Returns the unique matching element, or None when nothing matches.
    Raises AmbiguousReferenceError when several elements share the suffix.
    """
    wanted = tuple(path)
    if not wanted:
        return None
    exact = workspace._index.get(wanted, [])
    if len(exact) == 1:
        return exact[0]
    if len(exact) > 1:
        raise AmbiguousReferenceError(wanted, [wanted] * len(exact))
    matches = [
        (qualified, element)
        for qualified, elements in workspace._index.items()
        if len(qualified) > len(wanted) and qualified[-len(wanted):] == wanted
        for element in elements
    ]
    if not matches:
        return None
    if len(matches) > 1:
        raise AmbiguousReferenceError(wanted, [q for q, _ in matches])
    return matches[0][1]
