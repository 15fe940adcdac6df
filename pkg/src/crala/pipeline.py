"""End-to-end checking: parse -> workspace -> level validation -> refinement.

This is the library face of `crala check`; the acceptance suite drives it
directly. Documents with parse errors are linked by name but excluded from
semantic checks so syntax trouble never cascades into bogus findings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .model import (
    Assembly,
    CloudDescription,
    Configuration,
    Diagnostic,
    Document,
    Specification,
    dedupe_diagnostics,
    sort_diagnostics,
)
from .parser import parse
from .refinement import RefinementReport, check_assembly_deploys_config, check_config_refines_spec
from .validate import validate_assembly, validate_configuration, validate_specification
from .workspace import Workspace, build_workspace


@dataclass(frozen=True)
class CheckResult:
    workspace: Workspace
    clouds: tuple[CloudDescription, ...]  # standalone cloud blocks
    diagnostics: tuple[Diagnostic, ...]
    reports: Mapping[tuple[str, str], RefinementReport] = field(default_factory=dict)
    partial: frozenset[str] = frozenset()

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.is_error)


def check_sources(sources: list[tuple[str, str]]) -> CheckResult:
    """Run the whole pipeline over (file_name, text) pairs."""
    documents: list[Document] = []
    clouds: list[CloudDescription] = []
    diagnostics: list[Diagnostic] = []
    partial: set[str] = set()

    for file_name, text in sources:
        result = parse(text, file_name)
        diagnostics.extend(result.diagnostics)
        partial.update(result.partial)
        for doc in result.documents:
            if isinstance(doc, CloudDescription):
                clouds.append(doc)
            else:
                documents.append(doc)

    workspace = build_workspace(documents)
    diagnostics.extend(workspace.diagnostics)

    reports: dict[tuple[str, str], RefinementReport] = {}
    for doc in documents:
        if doc.name in partial or workspace.document(doc.name) is not doc:
            continue
        if isinstance(doc, Specification):
            diagnostics.extend(validate_specification(doc))
        elif isinstance(doc, Configuration):
            diagnostics.extend(validate_configuration(doc))
            spec = workspace.specification_of(doc)
            if spec is not None and spec.name not in partial:
                report = check_config_refines_spec(doc, spec)
                reports[(doc.name, spec.name)] = report
                diagnostics.extend(report.diagnostics)
        elif isinstance(doc, Assembly):
            config = workspace.configuration_of(doc)
            if config is not None and config.name not in partial:
                diagnostics.extend(validate_assembly(doc, config))
                report = check_assembly_deploys_config(doc, config)
                reports[(doc.name, config.name)] = report
                diagnostics.extend(report.diagnostics)

    merged = dedupe_diagnostics(sort_diagnostics(diagnostics))
    return CheckResult(workspace, tuple(clouds), merged, reports, frozenset(partial))


def check_files(paths: list[str]) -> CheckResult:
    """Read and check files from disk (OSError propagates to the caller)."""
    sources = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as handle:
            sources.append((path, handle.read()))
    return check_sources(sources)
